#include "vtp/io/dataset_io.hpp"

#include <cmath>
#include <sstream>

#include "vtp/core/error.hpp"
#include "vtp/io/csv.hpp"

namespace vtp::io {

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    std::filesystem::path p = csv;
    p.replace_extension(".json");
    return p;
}

void write_dataset(const std::filesystem::path& csv, const TrajectoryDataset& dataset, const nlohmann::json& extra) {
    dataset.validate();
    std::ostringstream out;
    CsvWriter w(out);
    std::vector<std::string> header{"traj_id", "t"};
    for (int c = 0; c < dataset.dim; ++c) header.push_back("p" + std::to_string(c));
    for (int c = 0; c < dataset.n_psi; ++c) header.push_back("psi" + std::to_string(c));
    w.header(header);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Trajectory& traj = dataset.trajectories[i];
        for (std::size_t k = 0; k < traj.size(); ++k) {
            w.field(i).field(traj.times[k]);
            for (int c = 0; c < dataset.dim; ++c) w.field(traj.positions(static_cast<Eigen::Index>(k), c));
            for (int c = 0; c < dataset.n_psi; ++c) w.field(dataset.params[i][c]);
            w.end_row();
        }
    }
    write_file(csv, out.str());

    nlohmann::json meta = extra;
    meta["format"] = "vtp-dataset";
    meta["format_version"] = 1;
    meta["d"] = dataset.dim;
    meta["n_psi"] = dataset.n_psi;
    meta["n_trajectories"] = dataset.size();
    meta["units"] = {{"t", "s"}, {"position", "m"}, {"frame", dataset.dim == 2 ? "north,east" : "north,east,down"}};
    for (const auto& [k, v] : dataset.meta) meta["meta"][k] = v;
    write_file(sidecar_path(csv), meta.dump(2) + "\n");
}

TrajectoryDataset read_dataset(const std::filesystem::path& csv) {
    const auto side = sidecar_path(csv);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(side));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(side.string() + ": " + e.what());
    }
    TrajectoryDataset ds;
    try {
        ds.dim = meta.at("d").get<int>();
        ds.n_psi = meta.at("n_psi").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(side.string() + ": " + e.what());
    }
    if (ds.dim != 2 && ds.dim != 3) throw DataError(side.string() + ": d must be 2 or 3");
    if (ds.n_psi < 0) throw DataError(side.string() + ": n_psi must be non-negative");
    if (meta.contains("meta") && meta["meta"].is_object())
        for (const auto& [k, v] : meta["meta"].items())
            if (v.is_string()) ds.meta[k] = v.get<std::string>();

    const std::string source = csv.string();
    const CsvTable table = read_csv(csv);
    std::vector<std::string> expected{"traj_id", "t"};
    for (int c = 0; c < ds.dim; ++c) expected.push_back("p" + std::to_string(c));
    for (int c = 0; c < ds.n_psi; ++c) expected.push_back("psi" + std::to_string(c));
    if (table.header != expected) throw DataError(source + ":1: header does not match the sidecar layout");

    long long current = -1;
    std::vector<std::vector<double>> rows;
    auto flush = [&](std::size_t line) {
        if (rows.empty()) return;
        Trajectory traj;
        traj.positions.resize(static_cast<Eigen::Index>(rows.size()), ds.dim);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            traj.times.push_back(rows[k][0]);
            for (int c = 0; c < ds.dim; ++c) traj.positions(static_cast<Eigen::Index>(k), c) = rows[k][1 + static_cast<std::size_t>(c)];
        }
        try {
            traj.validate();
        } catch (const ContractViolation& e) {
            throw DataError(source + ":" + std::to_string(line) + ": trajectory " + std::to_string(current) + ": " + e.what());
        }
        Vector psi(ds.n_psi);
        for (int c = 0; c < ds.n_psi; ++c) psi[c] = rows.front()[1 + static_cast<std::size_t>(ds.dim + c)];
        ds.trajectories.push_back(std::move(traj));
        ds.params.push_back(psi);
        rows.clear();
    };
    std::size_t last_line = 1;
    for (const CsvRow& row : table.rows) {
        const long long id = parse_int(row.fields[0], source, row.line);
        if (id != current) {
            if (id != current + 1)
                throw DataError(source + ":" + std::to_string(row.line) + ": trajectory ids must be consecutive from 0");
            flush(last_line);
            current = id;
        }
        std::vector<double> values;
        for (std::size_t f = 1; f < row.fields.size(); ++f) {
            const double v = parse_double(row.fields[f], source, row.line);
            if (!std::isfinite(v)) throw DataError(source + ":" + std::to_string(row.line) + ": non-finite value");
            values.push_back(v);
        }
        if (!rows.empty())
            for (int c = 0; c < ds.n_psi; ++c)
                if (values[1 + static_cast<std::size_t>(ds.dim + c)] != rows.front()[1 + static_cast<std::size_t>(ds.dim + c)])
                    throw DataError(source + ":" + std::to_string(row.line) + ": psi changes within a trajectory");
        rows.push_back(std::move(values));
        last_line = row.line;
    }
    flush(last_line);
    if (ds.trajectories.empty()) throw DataError(source + ": no trajectories");
    return ds;
}

}  // namespace vtp::io

#include "vtp/io/checkpoint.hpp"

#include "vtp/core/error.hpp"
#include "vtp/io/csv.hpp"
#include "vtp/io/manifest.hpp"

namespace vtp::io {

namespace {

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw DataError("matrix size does not match its data");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
    return m;
}

nlohmann::json vector_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from(const nlohmann::json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json model_to_json(const flow::CnfModel& model, const nlohmann::json& training) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        nlohmann::json nets = nlohmann::json::array();
        for (const auto& net : layer.conditioners) {
            nlohmann::json weights = nlohmann::json::array(), biases = nlohmann::json::array();
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                weights.push_back(matrix_json(net.weights[l]));
                biases.push_back(matrix_json(net.biases[l]));
            }
            nets.push_back({{"layer_sizes", net.layer_sizes}, {"weights", weights}, {"biases", biases}});
        }
        layers.push_back({{"order", layer.order}, {"conditioners", nets}});
    }
    return {{"format", "vtp-cnf"},
            {"format_version", kCheckpointVersion},
            {"d", model.dim},
            {"n_psi", model.n_psi},
            {"n_layers", model.layers.size()},
            {"spline", {{"bins", model.spline.bins}, {"tail_bound", model.spline.tail_bound}}},
            {"layers", layers},
            {"normalization",
             {{"center", vector_json(model.norm.center)}, {"half_range", vector_json(model.norm.half_range)}}},
            {"frame_origin", vector_json(model.frame_origin)},
            {"seed", model.seed},
            {"training", training}};
}

flow::CnfModel model_from_json(const nlohmann::json& j, const std::string& source) {
    try {
        if (j.at("format").get<std::string>() != "vtp-cnf") throw DataError(source + ": not a model checkpoint");
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointVersion)
            throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
        flow::CnfModel model;
        model.dim = j.at("d").get<int>();
        model.n_psi = j.at("n_psi").get<int>();
        model.spline.bins = j.at("spline").at("bins").get<int>();
        model.spline.tail_bound = j.at("spline").at("tail_bound").get<double>();
        for (const auto& lj : j.at("layers")) {
            flow::FlowLayer layer;
            layer.order = lj.at("order").get<std::vector<int>>();
            for (const auto& nj : lj.at("conditioners")) {
                ad::MlpParams net;
                net.layer_sizes = nj.at("layer_sizes").get<std::vector<int>>();
                for (const auto& w : nj.at("weights")) net.weights.push_back(matrix_from(w));
                for (const auto& b : nj.at("biases")) net.biases.push_back(matrix_from(b));
                layer.conditioners.push_back(std::move(net));
            }
            model.layers.push_back(std::move(layer));
        }
        if (j.at("n_layers").get<std::size_t>() != model.layers.size())
            throw DataError(source + ": layer count does not match n_layers");
        model.norm.dim = model.dim;
        model.norm.n_psi = model.n_psi;
        model.norm.center = vector_from(j.at("normalization").at("center"));
        model.norm.half_range = vector_from(j.at("normalization").at("half_range"));
        model.frame_origin = vector_from(j.at("frame_origin"));
        model.seed = j.at("seed").get<std::uint64_t>();
        if (model.norm.center.size() != model.norm.channels() || model.norm.half_range.size() != model.norm.channels())
            throw DataError(source + ": normalization has the wrong number of channels");
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": " + e.what());
    } catch (const ContractViolation& e) {
        throw DataError(source + ": " + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const flow::CnfModel& model, const nlohmann::json& training) {
    write_file(path, model_to_json(model, training).dump() + "\n");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    LoadedCheckpoint out;
    out.model = model_from_json(j, path.string());
    out.training = j.value("training", nlohmann::json::object());
    out.digest = sha256_hex(text);
    return out;
}

}  // namespace vtp::io

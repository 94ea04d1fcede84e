#include "ridgekit/io.hpp"

#include "ridgekit/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ridgekit {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

void check_schema(const Json& j, const std::string& kind) {
    if (!j.is_object()) throw Error(ErrorCode::Parse, "expected a JSON object");
    const int version = field(j, "schema_version").get<int>();
    if (version != kSchemaVersion) {
        throw Error(ErrorCode::Parse, "unsupported schema_version " + std::to_string(version));
    }
    const auto got = field(j, "kind").get<std::string>();
    if (got != kind) throw Error(ErrorCode::Parse, "expected a '" + kind + "' document, got '" + got + "'");
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::Parse, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

const char* status_name(NodeStatus s) {
    switch (s) {
        case NodeStatus::Ok: return "ok";
        case NodeStatus::Degenerate: return "degenerate";
        case NodeStatus::Failed: return "failed";
    }
    return "ok";
}

NodeStatus status_from(const std::string& s) {
    if (s == "ok") return NodeStatus::Ok;
    if (s == "degenerate") return NodeStatus::Degenerate;
    if (s == "failed") return NodeStatus::Failed;
    throw Error(ErrorCode::Parse, "unknown node status '" + s + "'");
}

}  // namespace

Json matrix_to_json(const Matrix& A) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw Error(ErrorCode::Parse, "matrix must be an array of rows");
    if (j.empty()) return Matrix();
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorCode::Parse, "ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) A(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return A;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw Error(ErrorCode::Parse, "vector must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".nodes.json");
    return p;
}

std::string samples_to_csv(const FieldSamples& samples) {
    samples.validate();
    std::string out;
    const auto d = samples.X.cols();
    const auto N = samples.F.cols();
    for (Eigen::Index j = 0; j < d; ++j) out += (j ? ",x_" : "x_") + std::to_string(j + 1);
    for (Eigen::Index i = 0; i < N; ++i) out += ",f_" + std::to_string(i + 1);
    out += '\n';
    for (Eigen::Index m = 0; m < samples.X.rows(); ++m) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j) out += ',';
            out += format_double(samples.X(m, j));
        }
        for (Eigen::Index i = 0; i < N; ++i) {
            out += ',';
            out += format_double(samples.F(m, i));
        }
        out += '\n';
    }
    return out;
}

FieldSamples samples_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty samples file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    Eigen::Index d = 0;
    Eigen::Index N = 0;
    for (const auto& h : header) {
        const std::string expected_x = "x_" + std::to_string(d + 1);
        const std::string expected_f = "f_" + std::to_string(N + 1);
        if (N == 0 && h == expected_x) {
            ++d;
        } else if (h == expected_f) {
            ++N;
        } else {
            throw Error(ErrorCode::Parse, "unexpected column '" + h + "' (header must be x_1..x_d,f_1..f_N)");
        }
    }
    if (d == 0 || N == 0) throw Error(ErrorCode::Parse, "samples need at least one x and one f column");
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (static_cast<Eigen::Index>(cells.size()) != d + N) {
            throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                              " cells, expected " + std::to_string(d + N));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c));
        rows.push_back(std::move(row));
    }
    FieldSamples s;
    const auto M = static_cast<Eigen::Index>(rows.size());
    s.X.resize(M, d);
    s.F.resize(M, N);
    for (Eigen::Index m = 0; m < M; ++m) {
        const auto& row = rows[static_cast<std::size_t>(m)];
        for (Eigen::Index j = 0; j < d; ++j) s.X(m, j) = row[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < N; ++i) s.F(m, i) = row[static_cast<std::size_t>(d + i)];
    }
    return s;
}

void write_samples(const std::filesystem::path& csv, const FieldSamples& samples, const Vector& weights) {
    write_text(csv, samples_to_csv(samples));
    Json side = {{"schema_version", kSchemaVersion}, {"kind", "field_nodes"}, {"N", samples.F.cols()}};
    side["node_coords"] = matrix_to_json(samples.node_coords);
    if (weights.size() > 0) {
        if (weights.size() != samples.F.cols()) throw Error(ErrorCode::DimensionMismatch, "one weight per node required");
        side["weights"] = vector_to_json(weights);
    }
    write_text(sidecar_path(csv), side.dump(2) + "\n");
}

SampleFile read_samples(const std::filesystem::path& csv) {
    SampleFile out;
    out.samples = samples_from_csv(read_text(csv));
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side)) {
        const Json j = read_json(side);
        check_schema(j, "field_nodes");
        out.samples.node_coords = matrix_from_json(field(j, "node_coords"));
        if (j.contains("weights")) out.weights = vector_from_json(j.at("weights"));
    }
    out.samples.validate();
    return out;
}

Json basis_to_json(const Matrix& W) {
    Json flat = Json::array();
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (Eigen::Index j = 0; j < W.cols(); ++j) flat.push_back(W(i, j));
    return flat;
}

Matrix basis_from_json(const Json& j, Eigen::Index d, Eigen::Index r) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != d * r) {
        throw Error(ErrorCode::Parse, "directions must hold d * r row-major entries");
    }
    Matrix W(d, r);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index c = 0; c < r; ++c) W(i, c) = j[static_cast<std::size_t>(i * r + c)].get<double>();
    return W;
}

Json subspace_to_json(const Subspace& s) { return basis_to_json(s.basis()); }

Subspace subspace_from_json(const Json& j, Eigen::Index d, Eigen::Index r) {
    return Subspace::from_orthonormal(basis_from_json(j, d, r));
}

Json directions_to_json(const std::vector<Subspace>& dirs) {
    Json j = {{"schema_version", kSchemaVersion}, {"kind", "directions"}};
    j["d"] = dirs.empty() ? 0 : dirs.front().ambient_dim();
    j["r"] = dirs.empty() ? 0 : dirs.front().dim();
    Json list = Json::array();
    for (const auto& s : dirs) list.push_back(subspace_to_json(s));
    j["directions"] = std::move(list);
    return j;
}

std::vector<Subspace> directions_from_json(const Json& j) {
    if (j.is_object() && j.value("kind", "") == "embedded_model") {
        std::vector<Subspace> out;
        for (const auto& node : embedded_from_json(j).nodes) out.push_back(node.directions);
        return out;
    }
    check_schema(j, "directions");
    const auto d = field(j, "d").get<Eigen::Index>();
    const auto r = field(j, "r").get<Eigen::Index>();
    std::vector<Subspace> out;
    for (const auto& s : field(j, "directions")) out.push_back(subspace_from_json(s, d, r));
    return out;
}

Json ridge_object(const Subspace& directions, const RidgeProfile& profile) {
    return {{"d", directions.ambient_dim()},
            {"r", directions.dim()},
            {"degree", profile.degree()},
            {"basis_order", "graded_lex"},
            {"directions", subspace_to_json(directions)},
            {"coeffs", vector_to_json(profile.coeffs())},
            {"u_bounds", matrix_to_json(profile.bounds())}};
}

NodalRidgeModel ridge_from_object(const Json& j) {
    if (j.value("basis_order", "graded_lex") != "graded_lex") {
        throw Error(ErrorCode::Parse, "unsupported basis order");
    }
    try {
        const auto d = field(j, "d").get<Eigen::Index>();
        const auto r = field(j, "r").get<Eigen::Index>();
        NodalRidgeModel m;
        m.directions = subspace_from_json(field(j, "directions"), d, r);
        m.profile = RidgeProfile(field(j, "degree").get<int>(), vector_from_json(field(j, "coeffs")),
                                 matrix_from_json(field(j, "u_bounds")));
        return m;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse) throw;
        throw Error(ErrorCode::Parse, std::string("malformed ridge model: ") + e.what());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed ridge model: ") + e.what());
    }
}

Json model_to_json(const NodalRidgeModel& model) {
    Json j = {{"schema_version", kSchemaVersion}, {"kind", "nodal_model"}};
    j.update(ridge_object(model.directions, model.profile));
    return j;
}

NodalRidgeModel model_from_json(const Json& j) {
    check_schema(j, "nodal_model");
    return ridge_from_object(j);
}

Json embedded_to_json(const EmbeddedRidgeModel& model) {
    Json j = {{"schema_version", kSchemaVersion}, {"kind", "embedded_model"}, {"d", model.ambient_dim()}};
    j["N"] = model.size();
    j["weights"] = vector_to_json(model.weights);
    j["node_coords"] = matrix_to_json(model.node_coords);
    Json nodes = Json::array();
    for (std::size_t i = 0; i < model.size(); ++i) {
        Json node = ridge_object(model.nodes[i].directions, model.nodes[i].profile);
        node["status"] = status_name(model.status[i]);
        node["converged"] = static_cast<bool>(model.converged[i]);
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

EmbeddedRidgeModel embedded_from_json(const Json& j) {
    check_schema(j, "embedded_model");
    EmbeddedRidgeModel m;
    m.weights = vector_from_json(field(j, "weights"));
    m.node_coords = matrix_from_json(field(j, "node_coords"));
    for (const auto& node : field(j, "nodes")) {
        m.nodes.push_back(ridge_from_object(node));
        m.status.push_back(status_from(node.value("status", "ok")));
        m.converged.push_back(node.value("converged", true));
    }
    if (static_cast<Eigen::Index>(m.nodes.size()) != m.weights.size()) {
        throw Error(ErrorCode::Parse, "node count and weight count differ");
    }
    return m;
}

Json qoi_to_json(const QoiRidgeModel& model) {
    Json j = {{"schema_version", kSchemaVersion}, {"kind", "qoi_model"}};
    j.update(ridge_object(model.subspace, model.profile));
    j["eigenvalues"] = vector_to_json(model.spectrum.eigenvalues);
    return j;
}

QoiRidgeModel qoi_from_json(const Json& j) {
    check_schema(j, "qoi_model");
    const NodalRidgeModel ridge = ridge_from_object(j);
    QoiRidgeModel m;
    m.subspace = ridge.directions;
    m.profile = ridge.profile;
    m.spectrum.eigenvalues = vector_from_json(field(j, "eigenvalues"));
    return m;
}

Json plan_to_json(const CompressionPlan& plan, const std::vector<Subspace>& retained_dirs) {
    Json j = {{"schema_version", kSchemaVersion}, {"kind", "compression_plan"}};
    j["n_nodes"] = plan.n_nodes;
    j["method"] = plan.method;
    j["seed"] = plan.seed;
    j["stride"] = plan.stride;
    j["requested_k"] = plan.requested_k;
    j["achieved_k"] = plan.achieved_k;
    j["stalled"] = plan.stalled;
    j["retained"] = plan.retained;
    Json stages = Json::array();
    for (const auto& st : plan.stages) stages.push_back({{"missing", st.missing}, {"neighbors", st.neighbors}});
    j["stages"] = std::move(stages);
    j["fallback_nodes"] = plan.fallback_nodes;
    j["objective_trace"] = plan.objective_trace;
    if (!retained_dirs.empty()) {
        if (retained_dirs.size() != plan.retained.size()) {
            throw Error(ErrorCode::DimensionMismatch, "one direction per retained node required");
        }
        Json list = Json::array();
        for (const auto& s : retained_dirs) list.push_back(subspace_to_json(s));
        j["d"] = retained_dirs.front().ambient_dim();
        j["retained_directions"] = std::move(list);
    }
    return j;
}

CompressionPlan plan_from_json(const Json& j) {
    check_schema(j, "compression_plan");
    try {
        CompressionPlan p;
        p.n_nodes = field(j, "n_nodes").get<std::size_t>();
        p.method = j.value("method", "");
        p.seed = j.value("seed", std::uint64_t{0});
        p.stride = j.value("stride", std::size_t{0});
        p.requested_k = field(j, "requested_k").get<std::size_t>();
        p.achieved_k = field(j, "achieved_k").get<std::size_t>();
        p.stalled = j.value("stalled", false);
        p.retained = field(j, "retained").get<std::vector<NodeIndex>>();
        for (const auto& st : field(j, "stages")) {
            CompressionStage stage;
            stage.missing = field(st, "missing").get<std::vector<NodeIndex>>();
            stage.neighbors = field(st, "neighbors").get<std::vector<std::array<NodeIndex, 2>>>();
            p.stages.push_back(std::move(stage));
        }
        if (j.contains("fallback_nodes")) p.fallback_nodes = j.at("fallback_nodes").get<std::vector<NodeIndex>>();
        if (j.contains("objective_trace")) p.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        return p;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed plan: ") + e.what());
    }
}

std::vector<Subspace> plan_retained_directions(const Json& j) {
    if (!j.contains("retained_directions")) {
        throw Error(ErrorCode::Parse, "plan carries no retained_directions");
    }
    const auto d = field(j, "d").get<Eigen::Index>();
    std::vector<Subspace> out;
    for (const auto& s : j.at("retained_directions")) out.push_back(subspace_from_json(s, d, 1));
    return out;
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
        out += '\n';
    }
    return out;
}

Json Table::to_json() const {
    Json out = Json::array();
    for (const auto& row : rows) {
        Json obj = Json::object();
        for (std::size_t c = 0; c < columns.size() && c < row.size(); ++c) {
            const auto& cell = row[c];
            Json value = Json::accept(cell) ? Json::parse(cell) : Json(cell);
            if (!value.is_number() && !value.is_boolean()) value = cell;
            obj[columns[c]] = std::move(value);
        }
        out.push_back(std::move(obj));
    }
    return out;
}

}  // namespace ridgekit

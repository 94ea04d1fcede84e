#pragma once

#include "ridgekit/compression.hpp"
#include "ridgekit/embedded.hpp"
#include "ridgekit/ridge_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ridgekit {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Matrices are stored as arrays of rows.
Json matrix_to_json(const Matrix& A);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest text that round-trips the double exactly.
std::string format_double(double v);

struct SampleFile {
    FieldSamples samples;
    /// Quadrature weights from the sidecar, empty when absent.
    Vector weights;
};

/// Sidecar next to a samples CSV: "samples.csv" -> "samples.nodes.json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// CSV with header x_1..x_d,f_1..f_N and one row per sample; node
/// coordinates and weights go to the sidecar JSON.
void write_samples(const std::filesystem::path& csv, const FieldSamples& samples,
                   const Vector& weights = Vector());
/// Reads the CSV and, when present, its sidecar.
SampleFile read_samples(const std::filesystem::path& csv);
/// Text-only halves of the above, for streams and tests.
std::string samples_to_csv(const FieldSamples& samples);
FieldSamples samples_from_csv(const std::string& text);

/// Bases are stored row-major as flat arrays of d * r numbers.
Json subspace_to_json(const Subspace& s);
Subspace subspace_from_json(const Json& j, Eigen::Index d, Eigen::Index r);

/// {"schema_version", "kind": "directions", "d", "r", "directions": [...]}.
Json directions_to_json(const std::vector<Subspace>& dirs);
/// Accepts a directions document or an embedded model (node directions).
std::vector<Subspace> directions_from_json(const Json& j);

/// Ridge model object: d, r, degree, basis_order, directions, coeffs,
/// u_bounds. Nodal, embedded-node and qoi documents all embed it.
Json ridge_object(const Subspace& directions, const RidgeProfile& profile);
NodalRidgeModel ridge_from_object(const Json& j);

Json model_to_json(const NodalRidgeModel& model);
NodalRidgeModel model_from_json(const Json& j);

Json embedded_to_json(const EmbeddedRidgeModel& model);
EmbeddedRidgeModel embedded_from_json(const Json& j);

Json qoi_to_json(const QoiRidgeModel& model);
QoiRidgeModel qoi_from_json(const Json& j);

/// Plans optionally carry the retained directions (in plan.retained order)
/// so that a plan file alone is enough for recovery.
Json plan_to_json(const CompressionPlan& plan, const std::vector<Subspace>& retained_dirs = {});
CompressionPlan plan_from_json(const Json& j);
std::vector<Subspace> plan_retained_directions(const Json& j);

/// Tidy table of already formatted cells.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::string to_csv() const;
    /// Array of row objects; numeric and true/false cells keep their type.
    [[nodiscard]] Json to_json() const;
};

}  // namespace ridgekit

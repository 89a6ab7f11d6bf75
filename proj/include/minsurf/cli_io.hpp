#pragma once

#include "minsurf/gluing_solver.hpp"
#include "minsurf/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace minsurf {

inline constexpr const char* kToolVersion = "minsurf 1.0.0";

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::vector<double> epsilon{0.02};
    int grid = 256;       // immersion samples per direction
    int basis = 64;       // Galerkin basis size
    int modes = 11;       // eigenvalues reported
    Tolerances tol;
    double mu = -1.5;
    double delta = 1.5;
    int J = 8;
    double T = 8.0;       // neck half-cylinder length beyond t~
    double kappa = 10.0;
    std::string body = "builtin-catenoid";  // or the path of an OBJ mesh
    std::string body_metadata;              // end-chart metadata for a mesh body
    std::string out = "out";
    std::uint64_t seed = 1;
    int periods = 1;

    // key = value lines in a fixed order, round-trippable through parse_config.
    std::vector<std::pair<std::string, std::string>> echo() const;
    GluingConfig gluing() const;
};

// key = value lines, '#' starts a comment. Unknown keys and out-of-range values are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------------
// Meshes

struct MeshData {
    Mesh mesh;
    std::vector<Vec3> normals;  // empty or one per vertex
};

// Row-major triangulation of a sampled patch without wrap-around: (n0 - 1)(n1 - 1) quads.
Mesh grid_mesh(const VGrid2& X);

// ASCII OBJ: "v x y z" at 17 significant digits, optional "vn", faces 1-indexed.
void export_mesh(const Mesh& mesh, const std::filesystem::path& path, const std::vector<Vec3>* normals = nullptr);
MeshData read_obj(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------------
// Ended surfaces

enum class EndKind { CatenoidUp, CatenoidDown, Planar };

struct EndChart {
    EndKind kind = EndKind::CatenoidUp;
    double cut = 0.0;        // s0 for catenoid charts, r0 of the inverted disk for planar charts
    double sigma = 0.0;
    double varsigma = 0.0;
    double tilt = 0.0;
    int k = 1;               // declared decay order k + 1
    // Filled on import: fitted decay rate (e^{-rate s}, or |x|^{rate}) and the largest deviation.
    double measured_rate = 0.0;
    double deviation = 0.0;
};

struct EndedSurface {
    std::string name;
    Mesh mesh;
    std::vector<EndChart> charts;
    double symmetry_defect = 0.0;  // filled on import
};

// Catenoid X_c on [-s_max, s_max] x [0, 2 pi), closed in theta, with its two end charts.
EndedSurface builtin_catenoid(int n_s = 97, int n_theta = 64, double s_max = 3.0, double cut = 1.0);
void export_ended_surface(const EndedSurface& surface, const std::filesystem::path& mesh_path,
                          const std::filesystem::path& metadata_path);
EndedSurface import_ended_surface(const std::filesystem::path& mesh_path, const std::filesystem::path& metadata_path,
                                  const Tolerances& tol = {});
// Largest distance from a vertex to the catenoid |x_h| = cosh x3 together with the chart
// parameters; zero for the built-in instance up to rounding.
double catenoid_defect(const EndedSurface& surface);

// ---------------------------------------------------------------------------------------------
// Verification suite

struct CheckResult {
    int criterion = 0;     // acceptance criterion number, 0 for per-epsilon extras
    std::string key;       // anchor key, e.g. spectral_bound
    std::string quantity;  // what was measured, with its parameters
    double measured = 0.0;
    std::string relation;  // "<=" or ">="
    double bound = 0.0;
    bool pass = false;

    std::string line() const;
};

// Runs every acceptance check; the per-epsilon extras follow for each configured epsilon.
std::vector<CheckResult> run_verification(const RunConfig& cfg, bool include_extras = true);

// ---------------------------------------------------------------------------------------------
// Pipeline

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::string tool_version = kToolVersion;
    std::vector<std::pair<std::string, double>> timings;         // stage name, seconds
    std::vector<std::pair<std::string, std::string>> digests;    // file name, SHA-256
    std::vector<std::string> failures;                           // failing checks
    bool passed() const { return failures.empty(); }
    std::string text() const;
};

std::string sha256_file(const std::filesystem::path& path);

// generate | spectrum | verify | glue | export. Writes into cfg.out and the manifest last.
RunManifest run_pipeline(const RunConfig& cfg, const std::string& command);

}  // namespace minsurf

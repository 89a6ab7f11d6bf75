#include "minsurf/cli_io.hpp"

#include "minsurf/graph_models.hpp"
#include "minsurf/jacobi_spectral.hpp"
#include "minsurf/riemann_core.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace minsurf {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// key = value lines with '#' comments, in file order; duplicate keys are an error.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text, const char* what) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(std::string(what) + " line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(std::string(what) + " line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second) throw ConfigError(std::string(what) + ": duplicate key '" + key + "'");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (v.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(x))
        throw ConfigError("'" + key + "': '" + v + "' is not a number");
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (v.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError("'" + key + "': '" + v + "' is not an integer");
    return x;
}

// Shortest decimal that reads back to the same double.
std::string shortest(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string eps_tag(double e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", e);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Configuration

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    std::string eps;
    for (std::size_t i = 0; i < epsilon.size(); ++i) eps += (i ? "," : "") + shortest(epsilon[i]);
    return {{"epsilon", eps},
            {"grid", std::to_string(grid)},
            {"basis", std::to_string(basis)},
            {"modes", std::to_string(modes)},
            {"ode_tol", shortest(tol.ode)},
            {"frame_tol", shortest(tol.frame)},
            {"geo_tol", shortest(tol.geo)},
            {"solver_tol", shortest(tol.solver)},
            {"match_tol", shortest(tol.match)},
            {"sym_tol", shortest(tol.sym)},
            {"weld_tol", shortest(tol.weld)},
            {"mu", shortest(mu)},
            {"delta", shortest(delta)},
            {"J", std::to_string(J)},
            {"T", shortest(T)},
            {"kappa", shortest(kappa)},
            {"body", body},
            {"body_metadata", body_metadata},
            {"out", out},
            {"seed", std::to_string(seed)},
            {"periods", std::to_string(periods)}};
}

GluingConfig RunConfig::gluing() const {
    GluingConfig g;
    g.J = J;
    g.mu = mu;
    g.delta = delta;
    g.neck_length = T;
    g.kappa = kappa;
    g.tol = tol;
    return g;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters;
    auto tolerance = [&](double* slot) {
        return [slot](const std::string& k, const std::string& v) {
            const double x = parse_double(k, v);
            if (!(x > 0.0)) throw ConfigError("'" + k + "' = " + v + ": tolerances must be positive");
            *slot = x;
        };
    };
    setters["epsilon"] = [&](const std::string& k, const std::string& v) {
        c.epsilon.clear();
        std::istringstream in(v);
        std::string item;
        while (std::getline(in, item, ',')) {
            const double e = parse_double(k, trim(item));
            if (!(e > 0.0 && e <= 0.5))
                throw ConfigError("'epsilon' = " + trim(item) + " lies outside the admissible interval (0, 0.5]");
            c.epsilon.push_back(e);
        }
        if (c.epsilon.empty()) throw ConfigError("'epsilon': empty list");
    };
    setters["grid"] = [&](const std::string& k, const std::string& v) {
        c.grid = static_cast<int>(parse_int(k, v));
        if (c.grid < 16) throw ConfigError("'grid' must be at least 16");
    };
    setters["basis"] = [&](const std::string& k, const std::string& v) {
        c.basis = static_cast<int>(parse_int(k, v));
        if (c.basis < 8) throw ConfigError("'basis' must be at least 8");
    };
    setters["modes"] = [&](const std::string& k, const std::string& v) {
        c.modes = static_cast<int>(parse_int(k, v));
        if (c.modes < 1) throw ConfigError("'modes' must be positive");
    };
    setters["ode_tol"] = tolerance(&c.tol.ode);
    setters["frame_tol"] = tolerance(&c.tol.frame);
    setters["geo_tol"] = tolerance(&c.tol.geo);
    setters["solver_tol"] = tolerance(&c.tol.solver);
    setters["match_tol"] = tolerance(&c.tol.match);
    setters["sym_tol"] = tolerance(&c.tol.sym);
    setters["weld_tol"] = tolerance(&c.tol.weld);
    setters["mu"] = [&](const std::string& k, const std::string& v) {
        c.mu = parse_double(k, v);
        if (!(c.mu > -2.0 && c.mu < -1.0)) throw ConfigError("'mu' = " + v + " lies outside the admissible interval (-2, -1)");
    };
    setters["delta"] = [&](const std::string& k, const std::string& v) {
        c.delta = parse_double(k, v);
        if (!(c.delta > 1.0 && c.delta < 2.0))
            throw ConfigError("'delta' = " + v + " lies outside the admissible interval (1, 2)");
    };
    setters["J"] = [&](const std::string& k, const std::string& v) {
        c.J = static_cast<int>(parse_int(k, v));
        if (c.J < 4) throw ConfigError("'J' must be at least 4");
    };
    setters["T"] = [&](const std::string& k, const std::string& v) {
        c.T = parse_double(k, v);
        if (!(c.T > 0.0)) throw ConfigError("'T' must be positive");
    };
    setters["kappa"] = [&](const std::string& k, const std::string& v) {
        c.kappa = parse_double(k, v);
        if (!(c.kappa > 0.0)) throw ConfigError("'kappa' must be positive");
    };
    setters["body"] = [&](const std::string&, const std::string& v) {
        if (v.empty()) throw ConfigError("'body' must be builtin-catenoid or a mesh path");
        c.body = v;
    };
    setters["body_metadata"] = [&](const std::string&, const std::string& v) { c.body_metadata = v; };
    setters["out"] = [&](const std::string&, const std::string& v) {
        if (v.empty()) throw ConfigError("'out' must name a directory");
        c.out = v;
    };
    setters["seed"] = [&](const std::string& k, const std::string& v) {
        const long long s = parse_int(k, v);
        if (s < 0) throw ConfigError("'seed' must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    };
    setters["periods"] = [&](const std::string& k, const std::string& v) {
        c.periods = static_cast<int>(parse_int(k, v));
        if (c.periods < 1) throw ConfigError("'periods' must be at least 1");
    };
    for (const auto& [k, v] : parse_key_values(text, "config")) {
        const auto it = setters.find(k);
        if (it == setters.end()) throw ConfigError("unknown config key '" + k + "'");
        it->second(k, v);
    }
    if (c.body != "builtin-catenoid" && c.body_metadata.empty())
        throw ConfigError("'body' names a mesh, so 'body_metadata' is required");
    if (c.modes > c.basis / 2) throw ConfigError("'modes' must not exceed basis / 2");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

// ---------------------------------------------------------------------------------------------
// Meshes

Mesh grid_mesh(const VGrid2& X) {
    if (X.n0 < 2 || X.n1 < 2) throw std::invalid_argument("grid_mesh: need at least 2 x 2 samples");
    Mesh m;
    m.vertices = X.v;
    const auto id = [&](int i, int k) { return i * X.n1 + k; };
    for (int i = 0; i + 1 < X.n0; ++i)
        for (int k = 0; k + 1 < X.n1; ++k) {
            m.faces.push_back({id(i, k), id(i, k + 1), id(i + 1, k + 1)});
            m.faces.push_back({id(i, k), id(i + 1, k + 1), id(i + 1, k)});
        }
    return m;
}

void export_mesh(const Mesh& mesh, const std::filesystem::path& path, const std::vector<Vec3>* normals) {
    const int nv = static_cast<int>(mesh.vertices.size());
    if (normals && static_cast<int>(normals->size()) != nv)
        throw std::invalid_argument("export_mesh: one normal per vertex expected");
    for (int q = 0; q < nv; ++q)
        if (!mesh.vertices[q].allFinite()) throw FormatError("export_mesh: non-finite coordinate at vertex " + std::to_string(q));
    if (normals)
        for (int q = 0; q < nv; ++q)
            if (!(*normals)[q].allFinite()) throw FormatError("export_mesh: non-finite normal at vertex " + std::to_string(q));
    for (const auto& f : mesh.faces)
        for (int a : f)
            if (a < 0 || a >= nv) throw std::invalid_argument("export_mesh: face index out of range");
    std::ostringstream os;
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
        os << buf;
    }
    if (normals)
        for (const auto& n : *normals) {
            std::snprintf(buf, sizeof buf, "vn %.17g %.17g %.17g\n", n[0], n[1], n[2]);
            os << buf;
        }
    for (const auto& f : mesh.faces) {
        if (normals) os << "f " << f[0] + 1 << "//" << f[0] + 1 << ' ' << f[1] + 1 << "//" << f[1] + 1 << ' ' << f[2] + 1 << "//" << f[2] + 1 << '\n';
        else os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    write_text(path, os.str());
}

MeshData read_obj(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    MeshData d;
    std::string line;
    int lineno = 0;
    auto bad = [&](const std::string& why) {
        return FormatError(path.string() + " line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v" || tag == "vn") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw bad("expected three coordinates");
            (tag == "v" ? d.mesh.vertices : d.normals).emplace_back(x, y, z);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            std::string tok;
            int n = 0;
            while (ls >> tok) {
                if (n == 3) throw bad("only triangles are supported");
                const std::string head = tok.substr(0, tok.find('/'));
                f[n++] = static_cast<int>(parse_int("face", head)) - 1;
            }
            if (n != 3) throw bad("face with fewer than three vertices");
            d.mesh.faces.push_back(f);
        }
    }
    const int nv = static_cast<int>(d.mesh.vertices.size());
    for (const auto& f : d.mesh.faces)
        for (int a : f)
            if (a < 0 || a >= nv) throw FormatError(path.string() + ": face index out of range");
    if (!d.normals.empty() && static_cast<int>(d.normals.size()) != nv) throw FormatError(path.string() + ": normal count differs from vertex count");
    return d;
}

// ---------------------------------------------------------------------------------------------
// Ended surfaces

namespace {

const char* kind_name(EndKind k) {
    switch (k) {
        case EndKind::CatenoidUp: return "catenoid-up";
        case EndKind::CatenoidDown: return "catenoid-down";
        case EndKind::Planar: return "planar";
    }
    return "";
}

EndKind parse_kind(const std::string& s) {
    if (s == "catenoid-up") return EndKind::CatenoidUp;
    if (s == "catenoid-down") return EndKind::CatenoidDown;
    if (s == "planar") return EndKind::Planar;
    throw ConfigError("end chart kind '" + s + "' is not catenoid-up, catenoid-down or planar");
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

constexpr double kDecayFloor = 1e-11;   // deviations below this count as exact
constexpr double kRateSlack = 0.25;     // allowed shortfall of the fitted decay rate

// Fits the decay of the chart's deviation from its model end and checks the declared order.
void check_chart(const Mesh& mesh, EndChart& ch, int index) {
    struct Bin {
        double x_sum = 0.0;
        int n = 0;
        double amp = 0.0;
    };
    std::map<long, Bin> bins;
    int used = 0;
    for (const auto& v : mesh.vertices) {
        const double x = v[0] - ch.varsigma, y = v[1];
        const double r = std::hypot(x, y);
        double coord = 0.0, dev = 0.0, width = 0.25;
        if (ch.kind == EndKind::Planar) {
            if (r <= 0.0 || 1.0 / r > ch.cut) continue;
            coord = std::log(1.0 / r);
            dev = v[2] - ch.sigma - ch.tilt * x;
        } else {
            const bool up = ch.kind == EndKind::CatenoidUp;
            if ((up && v[2] - ch.sigma <= 0.0) || (!up && v[2] - ch.sigma >= 0.0)) continue;
            if (r < std::cosh(ch.cut) || r <= 1.1) continue;
            coord = std::acosh(r);
            const auto root = tilted_catenoid_root(ch.tilt, r, std::atan2(y, x), up ? NeckSide::Up : NeckSide::Down);
            dev = v[2] - ch.sigma - root.height;
        }
        Bin& b = bins[static_cast<long>(std::floor(coord / width))];
        b.x_sum += coord;
        b.n += 1;
        b.amp = std::max(b.amp, std::abs(dev));
        ++used;
    }
    const std::string name = "end chart " + std::to_string(index) + " (" + kind_name(ch.kind) + ")";
    if (used == 0) throw FormatError(name + ": no mesh vertices beyond the chart cut");
    std::vector<double> xs, ys;
    ch.deviation = 0.0;
    for (const auto& [key, b] : bins) {
        ch.deviation = std::max(ch.deviation, b.amp);
        if (b.amp > kDecayFloor) {
            xs.push_back(b.x_sum / b.n);
            ys.push_back(std::log(b.amp));
        }
    }
    if (xs.size() < 3) {
        ch.measured_rate = std::numeric_limits<double>::infinity();  // exact to rounding
        return;
    }
    ch.measured_rate = -slope(xs, ys);
    const double need = ch.k + 1.0;
    if (ch.measured_rate < need - kRateSlack) {
        std::ostringstream os;
        os << std::setprecision(4) << name << ": the deviation from the model end decays like ";
        if (ch.kind == EndKind::Planar)
            os << "|x|^" << ch.measured_rate << "; the chart requires u = O(|x|^{k+1}) = O(|x|^" << need << ")";
        else
            os << "e^{-" << ch.measured_rate << " s}; the chart requires decay like e^{-(k+1)s} = e^{-" << need << "s}";
        os << " (k = " << ch.k << ")";
        throw FormatError(os.str());
    }
}

// Largest distance from a vertex to the nearest vertex of the x2-mirrored mesh, searched within
// tol by hashing; throws when a vertex has no partner.
double symmetry_defect(const Mesh& mesh, double tol) {
    const double h = std::max(tol, 1e-12);
    struct Key {
        long long a, b, c;
        bool operator==(const Key& o) const { return a == o.a && b == o.b && c == o.c; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<long long>()(k.a * 73856093LL ^ k.b * 19349663LL ^ k.c * 83492791LL);
        }
    };
    std::unordered_map<Key, std::vector<int>, KeyHash> cells;
    const auto key = [h](const Vec3& p) {
        return Key{static_cast<long long>(std::floor(p[0] / h)), static_cast<long long>(std::floor(p[1] / h)),
                    static_cast<long long>(std::floor(p[2] / h))};
    };
    for (std::size_t q = 0; q < mesh.vertices.size(); ++q) cells[key(mesh.vertices[q])].push_back(static_cast<int>(q));
    double worst = 0.0;
    for (std::size_t q = 0; q < mesh.vertices.size(); ++q) {
        const Vec3 m(mesh.vertices[q][0], -mesh.vertices[q][1], mesh.vertices[q][2]);
        const Key c = key(m);
        double best = std::numeric_limits<double>::infinity();
        for (long long da = -1; da <= 1; ++da)
            for (long long db = -1; db <= 1; ++db)
                for (long long dc = -1; dc <= 1; ++dc) {
                    const auto it = cells.find(Key{c.a + da, c.b + db, c.c + dc});
                    if (it == cells.end()) continue;
                    for (int o : it->second) best = std::min(best, (mesh.vertices[o] - m).norm());
                }
        if (!(best <= tol)) {
            std::ostringstream os;
            os << "x2-symmetry check failed: vertex " << q << " has no mirror image within sym_tol = " << tol;
            throw FormatError(os.str());
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

EndedSurface builtin_catenoid(int n_s, int n_theta, double s_max, double cut) {
    if (n_s < 3 || n_theta < 8 || n_theta % 2) throw std::invalid_argument("builtin_catenoid: n_s >= 3, even n_theta >= 8");
    EndedSurface e;
    e.name = "builtin-catenoid";
    const auto s = linspace(-s_max, s_max, n_s);
    const auto th = periodic_grid(2.0 * kPi, n_theta);
    for (int i = 0; i < n_s; ++i)
        for (int k = 0; k < n_theta; ++k)
            e.mesh.vertices.emplace_back(std::cosh(s[i]) * std::cos(th[k]), std::cosh(s[i]) * std::sin(th[k]), s[i]);
    // Counterclockwise about the catenoid normal (cos, sin, -sinh) / cosh.
    const auto id = [n_theta](int i, int k) { return i * n_theta + (k % n_theta); };
    for (int i = 0; i + 1 < n_s; ++i)
        for (int k = 0; k < n_theta; ++k) {
            e.mesh.faces.push_back({id(i, k), id(i, k + 1), id(i + 1, k + 1)});
            e.mesh.faces.push_back({id(i, k), id(i + 1, k + 1), id(i + 1, k)});
        }
    EndChart up;
    up.kind = EndKind::CatenoidUp;
    up.cut = cut;
    EndChart dn = up;
    dn.kind = EndKind::CatenoidDown;
    e.charts = {up, dn};
    return e;
}

void export_ended_surface(const EndedSurface& surface, const std::filesystem::path& mesh_path,
                          const std::filesystem::path& metadata_path) {
    export_mesh(surface.mesh, mesh_path);
    std::ostringstream os;
    os << "name = " << surface.name << "\n";
    os << "charts = " << surface.charts.size() << "\n";
    for (std::size_t i = 0; i < surface.charts.size(); ++i) {
        const EndChart& c = surface.charts[i];
        const std::string p = "chart" + std::to_string(i) + ".";
        os << p << "kind = " << kind_name(c.kind) << "\n";
        os << p << "cut = " << fmt17(c.cut) << "\n";
        os << p << "sigma = " << fmt17(c.sigma) << "\n";
        os << p << "varsigma = " << fmt17(c.varsigma) << "\n";
        os << p << "tilt = " << fmt17(c.tilt) << "\n";
        os << p << "k = " << c.k << "\n";
    }
    write_text(metadata_path, os.str());
}

EndedSurface import_ended_surface(const std::filesystem::path& mesh_path, const std::filesystem::path& metadata_path,
                                  const Tolerances& tol) {
    EndedSurface e;
    e.mesh = read_obj(mesh_path).mesh;
    const auto kv = parse_key_values(read_text(metadata_path), "metadata");
    std::map<std::string, std::string> m(kv.begin(), kv.end());
    e.name = m.count("name") ? m["name"] : mesh_path.stem().string();
    if (!m.count("charts")) throw FormatError("metadata: missing chart count 'charts'");
    const long long n = parse_int("charts", m["charts"]);
    std::set<std::string> known{"name", "charts"};
    for (long long i = 0; i < n; ++i) {
        const std::string p = "chart" + std::to_string(i) + ".";
        auto get = [&](const std::string& f, bool required) -> std::string {
            known.insert(p + f);
            const auto it = m.find(p + f);
            if (it == m.end()) {
                if (required) throw FormatError("metadata: missing chart field '" + p + f + "'");
                return "";
            }
            return it->second;
        };
        EndChart c;
        c.kind = parse_kind(get("kind", true));
        c.cut = parse_double(p + "cut", get("cut", true));
        const std::string sg = get("sigma", false), vs = get("varsigma", false), tl = get("tilt", false);
        c.sigma = sg.empty() ? 0.0 : parse_double(p + "sigma", sg);
        c.varsigma = vs.empty() ? 0.0 : parse_double(p + "varsigma", vs);
        c.tilt = tl.empty() ? 0.0 : parse_double(p + "tilt", tl);
        c.k = static_cast<int>(parse_int(p + "k", get("k", true)));
        if (c.k < 0) throw FormatError("metadata: '" + p + "k' must be non-negative");
        if (!(c.cut > 0.0)) throw FormatError("metadata: '" + p + "cut' must be positive");
        e.charts.push_back(c);
    }
    for (const auto& [k, v] : kv)
        if (!known.count(k)) throw FormatError("metadata: unknown key '" + k + "'");
    for (EndKind need : {EndKind::CatenoidUp, EndKind::CatenoidDown})
        if (std::none_of(e.charts.begin(), e.charts.end(), [need](const EndChart& c) { return c.kind == need; }))
            throw FormatError(std::string("metadata: missing end chart of kind ") + kind_name(need));
    for (std::size_t i = 0; i < e.charts.size(); ++i) check_chart(e.mesh, e.charts[i], static_cast<int>(i));
    e.symmetry_defect = symmetry_defect(e.mesh, tol.sym);
    return e;
}

double catenoid_defect(const EndedSurface& surface) {
    for (const auto& c : surface.charts)
        if (c.sigma != 0.0 || c.varsigma != 0.0 || c.tilt != 0.0) return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (const auto& v : surface.mesh.vertices) d = std::max(d, std::abs(std::hypot(v[0], v[1]) - std::cosh(v[2])));
    return d;
}

// ---------------------------------------------------------------------------------------------
// Manifest, digests

std::string sha256_file(const std::filesystem::path& path) {
    const std::string data = read_text(path);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed for " + path.string());
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string RunManifest::text() const {
    std::ostringstream os;
    os << "tool_version = " << tool_version << "\n";
    os << "command = " << command << "\n";
    for (const auto& [k, v] : config) os << "config." << k << " = " << v << "\n";
    for (const auto& [k, t] : timings) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", t);
        os << "timing." << k << " = " << buf << "\n";
    }
    for (const auto& [f, d] : digests) os << "digest." << f << " = " << d << "\n";
    os << "status = " << (passed() ? "pass" : "fail") << "\n";
    for (std::size_t i = 0; i < failures.size(); ++i) os << "failure." << i << " = " << failures[i] << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------------------------
// Pipeline

namespace {

class Stage {
public:
    Stage(RunManifest& m, std::string name) : m_(m), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
    ~Stage() { m_.timings.emplace_back(name_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count()); }

private:
    RunManifest& m_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::string> files;  // relative to dir, in emission order

    std::filesystem::path add(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

void run_generate(const RunConfig& cfg, RunManifest& man, Outputs& out) {
    for (double e : cfg.epsilon) {
        Stage st(man, "generate.eps_" + eps_tag(e));
        const RiemannProfile p = solve_profile(e, 0.5, 1.0 / 512.0, cfg.tol);
        std::ostringstream csv;
        csv << "t,R,c\n";
        for (std::size_t i = 0; i < p.t_grid.size(); ++i) csv << fmt17(p.t_grid[i]) << ',' << fmt17(p.R[i]) << ',' << fmt17(p.c[i]) << '\n';
        write_text(out.add("profile_eps" + eps_tag(e) + ".csv"), csv.str());
        const ConformalFrame fr = conformal_frame(p, cfg.grid, cfg.grid, -1.0, cfg.tol);
        const ImmersionPatch im = immerse(fr, nullptr, cfg.tol);
        export_mesh(grid_mesh(im.X), out.add("immersion_eps" + eps_tag(e) + ".obj"), &im.N.v);
    }
}

void run_spectrum(const RunConfig& cfg, RunManifest& man, Outputs& out) {
    for (double e : cfg.epsilon) {
        Stage st(man, "spectrum.eps_" + eps_tag(e));
        const EvenSpectrum sp = spectrum_D(e, cfg.modes, cfg.basis, cfg.tol);
        std::ostringstream csv;
        csv << "i,lambda,lower_bound,margin,doubling_shift\n";
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < cfg.modes; ++i) {
            const double lb = i * i + 1.0 - std::sqrt(1.0 + 4.0 * e * e);
            const double margin = sp.lambda[i] - lb;
            worst = std::min(worst, margin);
            csv << i << ',' << fmt17(sp.lambda[i]) << ',' << fmt17(lb) << ',' << fmt17(margin) << ',' << fmt17(sp.doubling_shift) << '\n';
        }
        write_text(out.add("spectrum_eps" + eps_tag(e) + ".csv"), csv.str());
        if (worst < 0.0) man.failures.push_back("spectral_bound eps=" + eps_tag(e) + " min_margin=" + fmt17(worst));
        if (sp.doubling_shift > cfg.tol.eig)
            man.failures.push_back("spectral_bound eps=" + eps_tag(e) + " doubling_shift=" + fmt17(sp.doubling_shift));
    }
}

void run_verify(const RunConfig& cfg, RunManifest& man, Outputs& out) {
    Stage st(man, "verify");
    const auto checks = run_verification(cfg);
    std::ostringstream os;
    for (const auto& c : checks) {
        os << c.line() << "\n";
        if (!c.pass) man.failures.push_back(c.key + " " + c.quantity);
    }
    write_text(out.add("verify_report.txt"), os.str());
}

void check_body_source(const RunConfig& cfg) {
    if (cfg.body == "builtin-catenoid") return;
    const EndedSurface s = import_ended_surface(cfg.body, cfg.body_metadata, cfg.tol);
    const double d = catenoid_defect(s);
    if (!(d <= cfg.tol.geo))
        throw std::invalid_argument("body mesh '" + cfg.body +
                                    "' is not the catenoid instance; the gluing stage supports the catenoid body only");
}

void run_glue(const RunConfig& cfg, RunManifest& man, Outputs& out) {
    check_body_source(cfg);
    const bool multi = cfg.epsilon.size() > 1;
    for (double e : cfg.epsilon) {
        const std::string tag = eps_tag(e);
        const std::string sub = multi ? "eps_" + tag + "/" : "";
        if (multi) std::filesystem::create_directories(out.dir / ("eps_" + tag));
        GluingProblem gp(e, cfg.gluing());
        GluingParams p;
        MatchReport rep;
        {
            Stage st(man, "glue.match.eps_" + tag);
            std::tie(p, rep) = gp.match(GluingParams::zero(cfg.J));
        }
        GluedMesh g;
        {
            Stage st(man, "glue.mesh.eps_" + tag);
            g = gp.build_glued_mesh(p, cfg.periods, &rep);
        }
        std::ostringstream pc;
        pc << "name,value\n";
        const std::pair<const char*, double> scalars[] = {
            {"gamma_t", p.gamma_t}, {"gamma_b", p.gamma_b}, {"sigma_t", p.sigma_t}, {"sigma_b", p.sigma_b},
            {"varsigma_t", p.varsigma_t}, {"varsigma_b", p.varsigma_b}, {"eta_t", p.eta_t}, {"eta_b", p.eta_b},
            {"xi", p.xi}};
        for (const auto& [n, v] : scalars) pc << n << ',' << fmt17(v) << '\n';
        const std::pair<const char*, const std::vector<double>*> funcs[] = {
            {"phi_t", &p.phi_t}, {"phi_b", &p.phi_b}, {"phi_t_tilde", &p.phi_t_tilde}, {"phi_b_tilde", &p.phi_b_tilde}};
        for (const auto& [n, f] : funcs)
            for (std::size_t j = 2; j < f->size(); ++j) pc << n << '_' << j << ',' << fmt17((*f)[j]) << '\n';
        write_text(out.add(sub + "params.csv"), pc.str());

        std::ostringstream mc;
        mc << "mode,c0_top,c1_top,c0_bottom,c1_bottom\n";
        for (int j = 0; j <= cfg.J; ++j) {
            mc << j;
            for (int q = 0; q < 4; ++q) mc << ',' << fmt17(rep.modewise_residuals[4 * j + q]);
            mc << '\n';
        }
        mc << "sup," << fmt17(rep.c0_mismatch_top) << ',' << fmt17(rep.c1_mismatch_top) << ','
           << fmt17(rep.c0_mismatch_bottom) << ',' << fmt17(rep.c1_mismatch_bottom) << '\n';
        write_text(out.add(sub + "mismatch.csv"), mc.str());
        export_mesh(g.mesh, out.add(sub + "glued.obj"));

        std::ostringstream dr;
        dr << "epsilon = " << fmt17(e) << "\n"
           << "newton_iters = " << rep.newton_iters << "\n"
           << "trace_scale = " << fmt17(rep.trace_scale) << "\n"
           << "parameter_norm = " << fmt17(rep.parameter_norm) << "\n"
           << "max_H = " << fmt17(g.max_H) << "\n"
           << "max_H_body = " << fmt17(g.max_H_body) << "\n"
           << "max_H_neck_top = " << fmt17(g.max_H_neck_top) << "\n"
           << "max_H_neck_bottom = " << fmt17(g.max_H_neck_bottom) << "\n"
           << "seam_c0_jump = " << fmt17(g.seam_c0_jump) << "\n"
           << "seam_c1_jump = " << fmt17(g.seam_c1_jump) << "\n"
           << "weld_pairs = " << g.weld_pairs.size() << "\n"
           << "summary = " << g.summary << "\n";
        write_text(out.add(sub + "defect_report.txt"), dr.str());

        const double tol = cfg.tol.match * rep.trace_scale;
        if (std::max({rep.c0_mismatch_top, rep.c0_mismatch_bottom, rep.c1_mismatch_top, rep.c1_mismatch_bottom}) > tol)
            man.failures.push_back("glue eps=" + tag + " mismatch above match_tol");
        if (g.max_H > cfg.tol.geo) man.failures.push_back("glue eps=" + tag + " glued sup|H| above geo_tol");
        if (p.scaled_norm(e) > cfg.kappa * e) man.failures.push_back("glue eps=" + tag + " parameters outside the kappa eps ball");
    }
}

void run_export(const RunConfig& cfg, RunManifest& man, Outputs& out) {
    Stage st(man, "export");
    const EndedSurface s = cfg.body == "builtin-catenoid" ? builtin_catenoid()
                                                          : import_ended_surface(cfg.body, cfg.body_metadata, cfg.tol);
    export_ended_surface(s, out.add("body.obj"), out.add("body.meta"));
}

}  // namespace

RunManifest run_pipeline(const RunConfig& cfg, const std::string& command) {
    static const std::map<std::string, void (*)(const RunConfig&, RunManifest&, Outputs&)> commands{
        {"generate", run_generate}, {"spectrum", run_spectrum}, {"verify", run_verify}, {"glue", run_glue}, {"export", run_export}};
    const auto it = commands.find(command);
    if (it == commands.end()) throw std::invalid_argument("unknown command '" + command + "'");
    RunManifest man;
    man.command = command;
    man.config = cfg.echo();
    Outputs out{cfg.out, {}};
    std::filesystem::create_directories(out.dir);
    it->second(cfg, man, out);
    for (const auto& f : out.files) man.digests.emplace_back(f, sha256_file(out.dir / f));
    write_text(out.dir / "manifest.txt", man.text());
    return man;
}

}  // namespace minsurf

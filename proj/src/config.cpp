#include "oscdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "oscdiff/discretization.hpp"
#include "oscdiff/errors.hpp"

namespace oscdiff {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
    v = trim(v);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigurationError("key '" + std::string(key) + "': '" + std::string(v) +
                                 "' is not a number");
    }
    return out;
}

int to_int(std::string_view key, std::string_view v) {
    v = trim(v);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigurationError("key '" + std::string(key) + "': '" + std::string(v) +
                                 "' is not an integer");
    }
    return out;
}

std::vector<std::string_view> split(std::string_view v) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto pos = v.find(',');
        parts.push_back(trim(v.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        v.remove_prefix(pos + 1);
    }
    return parts;
}

bool to_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigurationError("key '" + std::string(key) + "' expects a boolean");
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
    return os.str();
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

TestCase parse_test_case(std::string_view name) {
    if (name == "testcos") return TestCase::testcos;
    if (name == "testosc") return TestCase::testosc;
    throw ConfigurationError("unknown test '" + std::string(name) + "'");
}

std::string_view test_case_name(TestCase t) {
    return t == TestCase::testcos ? "testcos" : "testosc";
}

double StudyConfig::adsorption_length() const {
    if (adsorption) return *adsorption;
    return oscdiff::adsorption_length({delta, phi_pot, 2.0});
}

const std::vector<std::string>& StudyConfig::keys() {
    static const std::vector<std::string> k{
        "test",   "scheme",     "N",         "N_list", "eps",        "dt",
        "t_fin",  "D",          "A",         "delta",  "phi_pot",    "M",
        "sigma",  "y0",         "R_B",       "P",      "dt_ref",     "N_ref",
        "ref_scheme", "solver", "ref_solver", "tolerance", "order", "centered",
        "dt_sub", "cache_dir",  "output",    "threads"};
    return k;
}

void set_config_value(StudyConfig& cfg, std::string_view key, std::string_view raw) {
    const std::string_view v = trim(raw);
    if (key == "test") cfg.test = parse_test_case(v);
    else if (key == "scheme") cfg.scheme = std::string(v);
    else if (key == "N") cfg.n = to_int(key, v);
    else if (key == "N_list") {
        cfg.n_list.clear();
        for (auto p : split(v)) cfg.n_list.push_back(to_int(key, p));
    } else if (key == "eps") {
        cfg.eps.clear();
        for (auto p : split(v)) cfg.eps.push_back(to_double(key, p));
    } else if (key == "dt") {
        cfg.dt.clear();
        for (auto p : split(v)) cfg.dt.push_back(to_double(key, p));
    } else if (key == "t_fin") cfg.t_fin = to_double(key, v);
    else if (key == "D") cfg.diffusion = to_double(key, v);
    else if (key == "A") cfg.amplitude = to_double(key, v);
    else if (key == "delta") cfg.delta = to_double(key, v);
    else if (key == "phi_pot") cfg.phi_pot = to_double(key, v);
    else if (key == "M") {
        if (v.empty() || v == "auto") cfg.adsorption.reset();
        else cfg.adsorption = to_double(key, v);
    } else if (key == "sigma") cfg.sigma = to_double(key, v);
    else if (key == "y0") cfg.y0 = to_double(key, v);
    else if (key == "R_B") cfg.radius = to_double(key, v);
    else if (key == "P") {
        const auto parts = split(v);
        if (parts.size() != 2) throw ConfigurationError("key 'P' expects 'x,y'");
        cfg.detector = {to_double(key, parts[0]), to_double(key, parts[1])};
    } else if (key == "dt_ref") cfg.dt_ref = to_double(key, v);
    else if (key == "N_ref") cfg.n_ref = to_int(key, v);
    else if (key == "ref_scheme") cfg.ref_scheme = std::string(v);
    else if (key == "solver") cfg.solver = std::string(v);
    else if (key == "ref_solver") cfg.ref_solver = std::string(v);
    else if (key == "tolerance") cfg.tolerance = to_double(key, v);
    else if (key == "order") cfg.order = to_int(key, v);
    else if (key == "centered") cfg.centered = to_bool(key, v);
    else if (key == "dt_sub") cfg.dt_sub = to_double(key, v);
    else if (key == "cache_dir") cfg.cache_dir = std::string(v);
    else if (key == "output") cfg.output = std::string(v);
    else if (key == "threads") cfg.threads = to_int(key, v);
    else throw ConfigurationError("unknown configuration key '" + std::string(key) + "'");
}

StudyConfig parse_config(std::string_view text, StudyConfig cfg) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view l = line;
        if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigurationError("line " + std::to_string(lineno) + ": expected key = value");
        }
        set_config_value(cfg, trim(l.substr(0, eq)), l.substr(eq + 1));
    }
    return cfg;
}

StudyConfig load_config(const std::string& path, StudyConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open configuration file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

void validate(const StudyConfig& cfg) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigurationError(what);
    };
    require(cfg.n >= 4 && cfg.n_ref >= 4, "N and N_ref must be at least 4");
    require(std::all_of(cfg.n_list.begin(), cfg.n_list.end(), [](int n) { return n >= 4; }),
            "N_list entries must be at least 4");
    require(!cfg.eps.empty() &&
                std::all_of(cfg.eps.begin(), cfg.eps.end(), [](double e) { return e > 0.0; }),
            "eps must be a non-empty list of positive values");
    require(!cfg.dt.empty() &&
                std::all_of(cfg.dt.begin(), cfg.dt.end(), [](double d) { return d > 0.0; }),
            "dt must be a non-empty list of positive values");
    require(cfg.t_fin >= 0.0, "t_fin must be non-negative");
    require(cfg.diffusion > 0.0, "D must be positive");
    require(cfg.delta > 0.0, "delta must be positive");
    require(!cfg.adsorption || *cfg.adsorption > 0.0, "M must be positive");
    require(cfg.sigma > 0.0, "sigma must be positive");
    require(cfg.radius >= 0.0 && cfg.radius < 1.0, "R_B must lie in [0,1)");
    require(cfg.dt_ref > 0.0, "dt_ref must be positive");
    require(cfg.tolerance > 0.0, "tolerance must be positive");
    require(cfg.order == 1 || cfg.order == 2, "order must be 1 or 2");
    require(std::abs(cfg.detector.x) < 1.0 && std::abs(cfg.detector.y) < 1.0,
            "detector P must lie inside the square");
}

std::string to_text(const StudyConfig& cfg) {
    std::ostringstream os;
    os << "test = " << test_case_name(cfg.test) << '\n'
       << "scheme = " << cfg.scheme << '\n'
       << "N = " << cfg.n << '\n'
       << "N_list = " << join(cfg.n_list) << '\n'
       << "eps = " << join(cfg.eps) << '\n'
       << "dt = " << join(cfg.dt) << '\n'
       << "t_fin = " << num(cfg.t_fin) << '\n'
       << "D = " << num(cfg.diffusion) << '\n'
       << "A = " << num(cfg.amplitude) << '\n'
       << "delta = " << num(cfg.delta) << '\n'
       << "phi_pot = " << num(cfg.phi_pot) << '\n'
       << "M = " << (cfg.adsorption ? num(*cfg.adsorption) : std::string("auto")) << '\n'
       << "sigma = " << num(cfg.sigma) << '\n'
       << "y0 = " << num(cfg.y0) << '\n'
       << "R_B = " << num(cfg.radius) << '\n'
       << "P = " << num(cfg.detector.x) << ',' << num(cfg.detector.y) << '\n'
       << "dt_ref = " << num(cfg.dt_ref) << '\n'
       << "N_ref = " << cfg.n_ref << '\n'
       << "ref_scheme = " << cfg.ref_scheme << '\n'
       << "solver = " << cfg.solver << '\n'
       << "ref_solver = " << cfg.ref_solver << '\n'
       << "tolerance = " << num(cfg.tolerance) << '\n'
       << "order = " << cfg.order << '\n'
       << "centered = " << (cfg.centered ? "true" : "false") << '\n'
       << "dt_sub = " << num(cfg.dt_sub) << '\n'
       << "cache_dir = " << cfg.cache_dir << '\n'
       << "output = " << cfg.output << '\n'
       << "threads = " << cfg.threads << '\n';
    return os.str();
}

}  // namespace oscdiff

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mopt/experiments.hpp"

namespace mopt {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Value {
    enum class Kind { Number, String, Bool, NumberList, StringList } kind;
    double num = 0.0;
    std::string str;
    bool flag = false;
    std::vector<double> nums;
    std::vector<std::string> strs;
};

Value parse_value(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    auto fail = [&](const std::string& why) {
        throw ConfigError("config line " + std::to_string(line_no) + ": " + why);
    };
    if (v.empty()) fail("missing value");
    Value out{};
    if (v == "true" || v == "false") {
        out.kind = Value::Kind::Bool;
        out.flag = v == "true";
        return out;
    }
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') fail("unterminated string");
        out.kind = Value::Kind::String;
        out.str = v.substr(1, v.size() - 2);
        return out;
    }
    if (v.front() == '[') {
        if (v.back() != ']') fail("unterminated array");
        std::string inner = v.substr(1, v.size() - 2);
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : inner) {
            if (ch == ',') { parts.push_back(cur); cur.clear(); }
            else cur += ch;
        }
        if (!trim(cur).empty()) parts.push_back(cur);
        bool strings = false;
        for (auto& p : parts)
            if (!trim(p).empty() && trim(p).front() == '"') strings = true;
        if (strings) {
            out.kind = Value::Kind::StringList;
            for (auto& p : parts) {
                const std::string t = trim(p);
                if (t.size() < 2 || t.front() != '"' || t.back() != '"')
                    fail("array mixes strings and non-strings");
                out.strs.push_back(t.substr(1, t.size() - 2));
            }
        } else {
            out.kind = Value::Kind::NumberList;
            for (auto& p : parts) {
                const std::string t = trim(p);
                if (t.empty()) fail("empty array element");
                char* end = nullptr;
                const double d = std::strtod(t.c_str(), &end);
                if (end != t.c_str() + t.size()) fail("bad number '" + t + "'");
                out.nums.push_back(d);
            }
        }
        return out;
    }
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) fail("bad value '" + v + "'");
    out.kind = Value::Kind::Number;
    out.num = d;
    return out;
}

KernelFamily kernel_from_string(const std::string& s, int line_no) {
    if (s == "diffusion") return KernelFamily::Diffusion;
    if (s == "uniform") return KernelFamily::Uniform;
    if (s == "gaussian") return KernelFamily::Gaussian;
    if (s == "exponential") return KernelFamily::Exponential;
    if (s == "gamma") return KernelFamily::Gamma;
    throw ConfigError("config line " + std::to_string(line_no) + ": unknown kernel '" + s + "'");
}

SelectionFamily selection_from_string(const std::string& s, int line_no) {
    if (s == "quadratic") return SelectionFamily::Quadratic;
    if (s == "super_quadratic") return SelectionFamily::SuperQuadratic;
    if (s == "bounded") return SelectionFamily::Bounded;
    throw ConfigError("config line " + std::to_string(line_no) + ": unknown selection '" + s + "'");
}

SweepAxis axis_from_string(const std::string& s, int line_no) {
    if (s == "none") return SweepAxis::None;
    if (s == "c") return SweepAxis::C;
    if (s == "alpha") return SweepAxis::Alpha;
    if (s == "z_init") return SweepAxis::ZInit;
    if (s == "kernel") return SweepAxis::Kernel;
    throw ConfigError("config line " + std::to_string(line_no) + ": unknown sweep axis '" + s + "'");
}

} // namespace

const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::None: return "none";
        case SweepAxis::C: return "c";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::ZInit: return "z_init";
        case SweepAxis::Kernel: return "kernel";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    bool saw_axis_key = false;
    while (std::getline(in, line)) {
        ++line_no;
        // strip the first '#' that is not inside a quoted string
        {
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') quoted = !quoted;
                else if (line[i] == '#' && !quoted) {
                    line = line.substr(0, i);
                    break;
                }
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": bad table header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const Value val = parse_value(line.substr(eq + 1), line_no);
        const std::string full = section.empty() ? key : section + "." + key;

        auto num = [&]() {
            if (val.kind != Value::Kind::Number)
                throw ConfigError("config line " + std::to_string(line_no) + ": '" + full +
                                  "' wants a number");
            return val.num;
        };
        auto str = [&]() {
            if (val.kind != Value::Kind::String)
                throw ConfigError("config line " + std::to_string(line_no) + ": '" + full +
                                  "' wants a string");
            return val.str;
        };
        auto is_empty_list = [&]() {
            return (val.kind == Value::Kind::NumberList && val.nums.empty()) ||
                   (val.kind == Value::Kind::StringList && val.strs.empty());
        };
        auto nums = [&]() -> std::vector<double> {
            if (is_empty_list()) return {};
            if (val.kind == Value::Kind::NumberList) return val.nums;
            if (val.kind == Value::Kind::Number) return {val.num};
            throw ConfigError("config line " + std::to_string(line_no) + ": '" + full +
                              "' wants a number array");
        };
        auto strs = [&]() -> std::vector<std::string> {
            if (is_empty_list()) return {};
            if (val.kind == Value::Kind::StringList) return val.strs;
            if (val.kind == Value::Kind::String) return {val.str};
            throw ConfigError("config line " + std::to_string(line_no) + ": '" + full +
                              "' wants a string array");
        };

        if (full == "mode") {
            const std::string m = str();
            if (m == "asexual") cfg.mode = ReproductionMode::Asexual;
            else if (m == "infinitesimal") cfg.mode = ReproductionMode::Infinitesimal;
            else throw ConfigError("config line " + std::to_string(line_no) + ": unknown mode '" + m + "'");
        } else if (full == "kernel.family") cfg.kernel = kernel_from_string(str(), line_no);
        else if (full == "kernel.gamma_shape") cfg.gamma_shape = num();
        else if (full == "selection.family") cfg.selection = selection_from_string(str(), line_no);
        else if (full == "selection.a6") cfg.a6 = num();
        else if (full == "selection.m_inf") cfg.m_inf = num();
        else if (full == "params.beta") cfg.params.beta = num();
        else if (full == "params.mu0") cfg.params.mu0 = num();
        else if (full == "params.alpha") cfg.params.alpha = num();
        else if (full == "params.sigma") cfg.params.sigma = num();
        else if (full == "params.c") cfg.params.c = num();
        else if (full == "sweep.axis") { cfg.axis = axis_from_string(str(), line_no); saw_axis_key = true; }
        else if (full == "sweep.values") cfg.sweep_values = nums();
        else if (full == "sweep.kernels") {
            cfg.kernel_series.clear();
            for (auto& s : strs()) cfg.kernel_series.push_back(kernel_from_string(s, line_no));
        } else if (full == "sweep.selections") {
            cfg.selection_series.clear();
            for (auto& s : strs()) cfg.selection_series.push_back(selection_from_string(s, line_no));
        } else if (full == "tipping.z_inits") cfg.tipping_z_inits = nums();
        else if (full == "tipping.c_fractions") cfg.tipping_c_fractions = nums();
        else if (full == "solver.dz") cfg.dz = num();
        else if (full == "solver.stop_tol") cfg.stop_tol = num();
        else if (full == "solver.max_iters") cfg.max_iters = std::int64_t(num());
        else if (full == "solver.domain_halfwidth") cfg.domain_halfwidth = num();
        else if (full == "solver.max_zstar") cfg.max_zstar = num();
        else if (full == "solver.dt") cfg.dt = num();
        else if (full == "output.dir") cfg.out_dir = str();
        else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + full + "'");
    }
    (void)saw_axis_key;
    if (!cfg.sweep_values.empty() && cfg.axis == SweepAxis::None)
        throw ConfigError("config: sweep.values given without sweep.axis");
    cfg.params.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream o;
    o << "mode = \"" << to_string(cfg.mode) << "\"\n\n";
    o << "[kernel]\n";
    o << "family = \"" << to_string(cfg.kernel) << "\"\n";
    o << "gamma_shape = " << fmt17(cfg.gamma_shape) << "\n\n";
    o << "[selection]\n";
    o << "family = \"" << to_string(cfg.selection) << "\"\n";
    o << "a6 = " << fmt17(cfg.a6) << "\n";
    o << "m_inf = " << fmt17(cfg.m_inf) << "\n\n";
    o << "[params]\n";
    o << "beta = " << fmt17(cfg.params.beta) << "\n";
    o << "mu0 = " << fmt17(cfg.params.mu0) << "\n";
    o << "alpha = " << fmt17(cfg.params.alpha) << "\n";
    o << "sigma = " << fmt17(cfg.params.sigma) << "\n";
    o << "c = " << fmt17(cfg.params.c) << "\n\n";
    o << "[sweep]\n";
    o << "axis = \"" << to_string(cfg.axis) << "\"\n";
    auto num_list = [&](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + fmt17(v[i]);
        return s + "]";
    };
    o << "values = " << num_list(cfg.sweep_values) << "\n";
    o << "kernels = [";
    for (std::size_t i = 0; i < cfg.kernel_series.size(); ++i)
        o << (i ? ", " : "") << '"' << to_string(cfg.kernel_series[i]) << '"';
    o << "]\n";
    o << "selections = [";
    for (std::size_t i = 0; i < cfg.selection_series.size(); ++i)
        o << (i ? ", " : "") << '"' << to_string(cfg.selection_series[i]) << '"';
    o << "]\n\n";
    o << "[tipping]\n";
    o << "z_inits = " << num_list(cfg.tipping_z_inits) << "\n";
    o << "c_fractions = " << num_list(cfg.tipping_c_fractions) << "\n\n";
    o << "[solver]\n";
    o << "dz = " << fmt17(cfg.dz) << "\n";
    o << "stop_tol = " << fmt17(cfg.stop_tol) << "\n";
    o << "max_iters = " << cfg.max_iters << "\n";
    o << "domain_halfwidth = " << fmt17(cfg.domain_halfwidth) << "\n";
    o << "max_zstar = " << fmt17(cfg.max_zstar) << "\n";
    o << "dt = " << fmt17(cfg.dt) << "\n\n";
    o << "[output]\n";
    o << "dir = \"" << cfg.out_dir << "\"\n";
    return o.str();
}

std::string config_schema() {
    return R"(# Configuration schema (key = type, default -- meaning)
mode = string, "asexual" -- reproduction model: asexual | infinitesimal

[kernel]
family = string, "gaussian" -- diffusion | uniform | gaussian | exponential | gamma
gamma_shape = number, 0.5 -- shape of the gamma kernel (> 0); 1 matches exponential

[selection]
family = string, "quadratic" -- quadratic | super_quadratic | bounded
a6 = number, 0.015625 -- dimensional sixth-order coefficient (super_quadratic)
m_inf = number, 0.5 -- dimensional mortality plateau (bounded)

[params]  # dimensional model parameters
beta = number, 1.0 -- birth rate (> mu0)
mu0 = number, 0.0 -- basal mortality at the optimum
alpha = number, 1.0 -- selection curvature at the optimum
sigma = number, 0.1 -- reproduction variance scale
c = number, 0.0 -- speed of the moving optimum (base point)

[sweep]
axis = string, "none" -- none | c | alpha | z_init | kernel (exactly one axis)
values = number array, [] -- sweep points along the axis (dimensional; z_init scaled)
kernels = string array, [] -- kernel series for compare runs (empty: kernel.family)
selections = string array, [] -- selection series for compare runs

[tipping]
z_inits = number array, [] -- scaled initial lags for basin maps
c_fractions = number array, [] -- speeds as fractions of c_tip (overrides sweep.values)

[solver]  # scaled units; 0 = choose automatically
dz = number, 0.0 -- grid spacing
stop_tol = number, 1e-9 -- on ||dp/dt||_inf
max_iters = number, 2000000
domain_halfwidth = number, 0.0 -- half-width of the trait grid
max_zstar = number, 20.0 -- skip simulation when predicted |z*| exceeds this
dt = number, 0.0 -- explicit Euler step

[output]
dir = string, "out"
)";
}

std::vector<std::string> preset_names() {
    return {"kernel-sweep-asexual",
            "speed-sweep-asexual",
            "speed-sweep-infinitesimal",
            "selection-strength-sweep-asexual",
            "selection-strength-sweep-infinitesimal",
            "tipping-asexual",
            "tipping-infinitesimal",
            "distribution-asexual",
            "distribution-infinitesimal",
            "distribution-asexual-bounded"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    auto linspace = [](double a, double b, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
        return v;
    };
    if (name == "kernel-sweep-asexual") {
        cfg.mode = ReproductionMode::Asexual;
        cfg.params = {2.0, 0.0, 1.0, 0.1, 0.0};
        cfg.kernel_series = {KernelFamily::Diffusion, KernelFamily::Uniform,
                             KernelFamily::Gaussian, KernelFamily::Exponential,
                             KernelFamily::Gamma};
        cfg.axis = SweepAxis::C;
        cfg.sweep_values = linspace(0.05, 0.5, 10);
        cfg.out_dir = "out/kernel-sweep-asexual";
        return cfg;
    }
    if (name == "speed-sweep-asexual" || name == "speed-sweep-infinitesimal") {
        const bool asex = name == "speed-sweep-asexual";
        cfg.mode = asex ? ReproductionMode::Asexual : ReproductionMode::Infinitesimal;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.0};
        cfg.m_inf = asex ? 0.5 : 1.0;
        cfg.selection_series = {SelectionFamily::Quadratic, SelectionFamily::SuperQuadratic,
                                SelectionFamily::Bounded};
        cfg.axis = SweepAxis::C;
        // dimensional speeds spanning the interesting range of each model
        cfg.sweep_values = asex ? linspace(0.01, 0.12, 8) : linspace(0.0005, 0.007, 8);
        cfg.out_dir = "out/" + name;
        return cfg;
    }
    if (name == "selection-strength-sweep-asexual" ||
        name == "selection-strength-sweep-infinitesimal") {
        const bool asex = name == "selection-strength-sweep-asexual";
        cfg.mode = asex ? ReproductionMode::Asexual : ReproductionMode::Infinitesimal;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.05};
        cfg.m_inf = asex ? 0.5 : 1.0;
        cfg.selection_series = {SelectionFamily::Quadratic, SelectionFamily::SuperQuadratic,
                                SelectionFamily::Bounded};
        cfg.axis = SweepAxis::Alpha;
        cfg.sweep_values = {0.01, 0.025, 0.0625, 0.15625, 0.390625, 1.0, 1.6, 2.5, 4.0};
        cfg.out_dir = "out/" + name;
        return cfg;
    }
    if (name == "tipping-asexual") {
        cfg.mode = ReproductionMode::Asexual;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.0};
        cfg.selection = SelectionFamily::Bounded;
        cfg.m_inf = 0.5;
        cfg.axis = SweepAxis::C;
        cfg.tipping_c_fractions = {0.25, 0.5, 0.75, 0.9, 1.1, 1.3, 1.5};
        cfg.tipping_z_inits = {0.0, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0};
        cfg.out_dir = "out/tipping-asexual";
        return cfg;
    }
    if (name == "tipping-infinitesimal") {
        cfg.mode = ReproductionMode::Infinitesimal;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.0};
        cfg.selection = SelectionFamily::Bounded;
        cfg.m_inf = 1.0;
        cfg.axis = SweepAxis::C;
        cfg.tipping_c_fractions = {0.25, 0.5, 0.75, 0.9, 1.1, 1.3, 1.5};
        cfg.tipping_z_inits = {0.0, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0};
        cfg.out_dir = "out/tipping-infinitesimal";
        return cfg;
    }
    if (name == "distribution-asexual") {
        cfg.mode = ReproductionMode::Asexual;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.09};
        cfg.out_dir = "out/distribution-asexual";
        return cfg;
    }
    if (name == "distribution-infinitesimal") {
        cfg.mode = ReproductionMode::Infinitesimal;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.05};
        // The bulk sits |z*|/sd ~ 50 standard deviations below the optimum, so
        // a variance bias b displaces the lag by |z*| b; the mesh must be much
        // finer than the generic default to keep that below the profile scale.
        cfg.dz = 0.0025;
        cfg.out_dir = "out/distribution-infinitesimal";
        return cfg;
    }
    if (name == "distribution-asexual-bounded") {
        cfg.mode = ReproductionMode::Asexual;
        cfg.params = {1.0, 0.0, 1.0, 0.1, 0.095};
        cfg.selection = SelectionFamily::Bounded;
        cfg.m_inf = 0.5;
        cfg.out_dir = "out/distribution-asexual-bounded";
        return cfg;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

} // namespace mopt

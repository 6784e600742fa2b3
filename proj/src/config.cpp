#include "gfatom/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace gfatom {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[48];
    for (int prec = 12; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

double as_number(const std::string& source, const std::string& key,
                 const ConfigValue& v) {
    if (v.is_string)
        throw ConfigError(source, v.line,
                          "expected a number for key '" + key + "'");
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.raw.c_str(), &end);
    if (v.raw.empty() || end != v.raw.c_str() + v.raw.size() || errno == ERANGE)
        throw ConfigError(source, v.line,
                          "expected a number for key '" + key + "', got '" +
                              v.raw + "'");
    if (!std::isfinite(x))
        throw ConfigError(source, v.line,
                          "non-finite value for key '" + key + "'");
    return x;
}

// Alias-aware typed access to one section with unknown-key detection.
class SectionReader {
  public:
    SectionReader(const std::string& source, const ConfigSection& sec)
        : source_(source), sec_(sec) {}

    const ConfigValue* lookup(std::initializer_list<const char*> names) {
        const ConfigValue* found = nullptr;
        const char* found_name = nullptr;
        for (const char* n : names) {
            const ConfigValue* v = sec_.find(n);
            if (v == nullptr) continue;
            if (found != nullptr)
                throw ConfigError(source_, v->line,
                                  std::string("keys '") + found_name +
                                      "' and '" + n +
                                      "' are aliases; give only one");
            found = v;
            found_name = n;
            consumed_.insert(n);
        }
        if (found != nullptr) last_name_ = found_name;
        return found;
    }

    bool has(std::initializer_list<const char*> names) {
        return lookup(names) != nullptr;
    }

    double number(std::initializer_list<const char*> names, double def) {
        const ConfigValue* v = lookup(names);
        return v == nullptr ? def : as_number(source_, last_name_, *v);
    }

    double required_number(std::initializer_list<const char*> names) {
        const ConfigValue* v = lookup(names);
        if (v == nullptr) missing(names);
        return as_number(source_, last_name_, *v);
    }

    int integer(std::initializer_list<const char*> names, int def) {
        const ConfigValue* v = lookup(names);
        if (v == nullptr) return def;
        const double x = as_number(source_, last_name_, *v);
        if (std::abs(x - std::round(x)) > 1e-9 || std::abs(x) > 2e9)
            throw ConfigError(source_, v->line,
                              "expected an integer for key '" +
                                  std::string(last_name_) + "'");
        return static_cast<int>(std::llround(x));
    }

    int required_integer(std::initializer_list<const char*> names) {
        if (lookup(names) == nullptr) missing(names);
        // re-lookup is idempotent; reuse integer() with a dummy default
        return integer(names, 0);
    }

    std::string str(std::initializer_list<const char*> names,
                    const std::string& def) {
        const ConfigValue* v = lookup(names);
        return v == nullptr ? def : v->raw;
    }

    std::string required_str(std::initializer_list<const char*> names) {
        const ConfigValue* v = lookup(names);
        if (v == nullptr) missing(names);
        return v->raw;
    }

    int line_of(std::initializer_list<const char*> names) {
        const ConfigValue* v = lookup(names);
        return v == nullptr ? sec_.line : v->line;
    }

    void finish() const {
        for (const auto& kv : sec_.entries)
            if (consumed_.count(kv.first) == 0)
                throw ConfigError(source_, kv.second.line,
                                  "unknown key '" + kv.first + "' in [" +
                                      sec_.name + "]");
    }

  private:
    [[noreturn]] void missing(std::initializer_list<const char*> names) const {
        throw ConfigError(source_, sec_.line,
                          "missing key '" + std::string(*names.begin()) +
                              "' in [" + sec_.name + "]");
    }

    const std::string& source_;
    const ConfigSection& sec_;
    std::set<std::string> consumed_;
    const char* last_name_ = "";
};

const char* kind_name(ModelKind k) {
    return k == ModelKind::DoubleLambda ? "double_lambda" : "n_type";
}

bool axis_known(const std::string& a) {
    return a == "delta_p" || a == "delta_c" || a == "delta_s" ||
           a == "omega_p" || a == "omega_c" || a == "omega_s" || a == "beta";
}

bool axis_uses_switching(const std::string& a) {
    return a == "delta_s" || a == "omega_s";
}

}  // namespace

ParsedConfig ParsedConfig::from_string(const std::string& text,
                                       const std::string& source_name) {
    ParsedConfig pc;
    pc.source = source_name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    ConfigSection* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments, respecting quoted strings
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line.erase(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(pc.source, lineno,
                                  "malformed section header '" + line + "'");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty())
                throw ConfigError(pc.source, lineno, "empty section name");
            if (pc.find(name) != nullptr)
                throw ConfigError(pc.source, lineno,
                                  "duplicate section [" + name + "]");
            pc.sections.push_back(ConfigSection{name, lineno, {}});
            current = &pc.sections.back();
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(pc.source, lineno,
                              "expected 'key = value', got '" + line + "'");
        if (current == nullptr)
            throw ConfigError(pc.source, lineno,
                              "key outside of any [section]");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(pc.source, lineno, "empty key name");
        if (value.empty())
            throw ConfigError(pc.source, lineno,
                              "missing value for key '" + key + "'");
        if (current->find(key) != nullptr)
            throw ConfigError(pc.source, lineno,
                              "duplicate key '" + key + "' in [" +
                                  current->name + "]");

        ConfigValue cv;
        cv.line = lineno;
        if (value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                throw ConfigError(pc.source, lineno,
                                  "unterminated string for key '" + key + "'");
            cv.is_string = true;
            cv.raw = value.substr(1, value.size() - 2);
        } else {
            cv.raw = value;
        }
        current->entries.emplace_back(key, cv);
    }
    return pc;
}

ParsedConfig ParsedConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
}

RunConfig parse_run_config(const std::string& text,
                           const std::string& source_name) {
    const ParsedConfig pc = ParsedConfig::from_string(text, source_name);
    RunConfig rc;
    rc.source_path = source_name;

    for (const auto& sec : pc.sections)
        if (sec.name != "model" && sec.name != "scan" && sec.name != "numeric" &&
            sec.name != "output")
            throw ConfigError(pc.source, sec.line,
                              "unknown section [" + sec.name + "]");

    const ConfigSection* ms = pc.find("model");
    if (ms == nullptr) throw ConfigError(pc.source, "missing [model] section");
    {
        SectionReader r(pc.source, *ms);
        const std::string kind = r.required_str({"kind"});
        const int kind_line = r.line_of({"kind"});
        const double g31 = r.number({"gamma31_MHz", "gamma31"}, 0.0);
        const double g32 = r.number({"gamma32_MHz", "gamma32"}, 0.0);
        const double g41 = r.number({"gamma41_MHz", "gamma41"}, 0.0);
        const double g42 = r.number({"gamma42_MHz", "gamma42"}, 0.0);
        const double beta = r.number({"beta"}, 0.0);
        const double omega = r.number({"omega_MHz", "omega"}, 0.0);
        const int omega_line = r.line_of({"omega_MHz", "omega"});
        const double op = r.number({"omega_p_MHz", "omega_p"}, 0.0);
        const double oc = r.number({"omega_c_MHz", "omega_c"}, 0.0);
        const double os = r.number({"omega_s_MHz", "omega_s"}, 0.0);
        const int os_line = r.line_of({"omega_s_MHz", "omega_s"});
        const double dp = r.number({"delta_p_MHz", "delta_p"}, 0.0);
        const double dc = r.number({"delta_c_MHz", "delta_c"}, 0.0);
        const double ds = r.number({"delta_s_MHz", "delta_s"}, 0.0);
        const int ds_line = r.line_of({"delta_s_MHz", "delta_s"});
        rc.initial_level = r.integer({"initial_level"}, 1);
        const int il_line = r.line_of({"initial_level"});
        r.finish();

        if (rc.initial_level < 1 || rc.initial_level > 4)
            throw ConfigError(pc.source, il_line,
                              "initial_level must be 1..4");
        try {
            if (kind == "double_lambda") {
                if (os != 0.0)
                    throw ConfigError(pc.source, os_line,
                                      "double_lambda has no switching field; "
                                      "remove 'omega_s_MHz'");
                if (ds != 0.0)
                    throw ConfigError(pc.source, ds_line,
                                      "double_lambda has no switching field; "
                                      "remove 'delta_s_MHz'");
                DoubleLambdaParams p;
                p.gamma31 = g31;
                p.gamma32 = g32;
                p.gamma41 = g41;
                p.gamma42 = g42;
                p.beta = beta;
                p.omega = omega;
                p.omega_p = op;
                p.omega_c = oc;
                p.delta_p = dp;
                p.delta_c = dc;
                std::tie(rc.model, rc.drive) = build_double_lambda(p);
            } else if (kind == "n_type") {
                if (omega != 0.0)
                    throw ConfigError(pc.source, omega_line,
                                      "n_type has no ground-state splitting; "
                                      "remove 'omega_MHz'");
                NTypeParams p;
                p.gamma31 = g31;
                p.gamma32 = g32;
                p.gamma41 = g41;
                p.gamma42 = g42;
                p.beta = beta;
                p.omega_p = op;
                p.omega_c = oc;
                p.omega_s = os;
                p.delta_p = dp;
                p.delta_c = dc;
                p.delta_s = ds;
                std::tie(rc.model, rc.drive) = build_n_type(p);
            } else {
                throw ConfigError(pc.source, kind_line,
                                  "kind must be \"double_lambda\" or "
                                  "\"n_type\", got \"" + kind + "\"");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(pc.source, ms->line, e.what());
        }
    }

    if (const ConfigSection* ss = pc.find("scan")) {
        SectionReader r(pc.source, *ss);
        rc.has_scan = true;
        rc.scan.axis = r.required_str({"axis"});
        const int axis_line = r.line_of({"axis"});
        rc.scan.min = r.required_number({"min_MHz", "min"});
        rc.scan.max = r.required_number({"max_MHz", "max"});
        rc.scan.points = r.required_integer({"points"});
        const int points_line = r.line_of({"points"});
        const bool want2 = r.has({"axis2"}) || r.has({"min2_MHz", "min2"}) ||
                           r.has({"max2_MHz", "max2"}) || r.has({"points2"});
        int axis2_line = ss->line;
        int points2_line = ss->line;
        if (want2) {
            rc.scan.axis2 = r.required_str({"axis2"});
            axis2_line = r.line_of({"axis2"});
            rc.scan.min2 = r.required_number({"min2_MHz", "min2"});
            rc.scan.max2 = r.required_number({"max2_MHz", "max2"});
            rc.scan.points2 = r.required_integer({"points2"});
            points2_line = r.line_of({"points2"});
        }
        r.finish();

        auto check_axis = [&](const std::string& a, int line) {
            if (!axis_known(a))
                throw ConfigError(pc.source, line,
                                  "unknown scan axis '" + a + "'");
            if (rc.model.kind == ModelKind::DoubleLambda &&
                axis_uses_switching(a))
                throw ConfigError(pc.source, line,
                                  "axis '" + a +
                                      "' is not a double_lambda parameter");
        };
        auto check_grid = [&](double lo, double hi, int n, int line) {
            if (n <= 0) throw ConfigError(pc.source, line, "scan grid empty");
            if (n == 1)
                throw ConfigError(pc.source, line,
                                  "scan grid needs at least 2 points");
            if (!(lo < hi))
                throw ConfigError(pc.source, line,
                                  "scan range must satisfy min < max");
        };
        check_axis(rc.scan.axis, axis_line);
        check_grid(rc.scan.min, rc.scan.max, rc.scan.points, points_line);
        if (want2) {
            check_axis(rc.scan.axis2, axis2_line);
            check_grid(rc.scan.min2, rc.scan.max2, rc.scan.points2,
                       points2_line);
            if (rc.scan.axis2 == rc.scan.axis)
                throw ConfigError(pc.source, axis2_line,
                                  "axis2 must differ from axis");
        }
    }

    if (const ConfigSection* ns = pc.find("numeric")) {
        SectionReader r(pc.source, *ns);
        rc.numeric.rtol = r.number({"rtol"}, rc.numeric.rtol);
        rc.numeric.atol = r.number({"atol"}, rc.numeric.atol);
        rc.numeric.rate_tol = r.number({"rate_tol"}, rc.numeric.rate_tol);
        rc.numeric.q_tol = r.number({"q_tol"}, rc.numeric.q_tol);
        rc.numeric.t_eval_us = r.number({"t_eval_us"}, rc.numeric.t_eval_us);
        rc.numeric.dark_threshold =
            r.number({"dark_threshold"}, rc.numeric.dark_threshold);
        rc.numeric.n_max = r.integer({"n_max"}, rc.numeric.n_max);
        r.finish();
        auto positive = [&](double v, const char* what) {
            if (!(v > 0.0))
                throw ConfigError(pc.source, ns->line,
                                  std::string(what) + " must be > 0");
        };
        positive(rc.numeric.rtol, "rtol");
        positive(rc.numeric.atol, "atol");
        positive(rc.numeric.rate_tol, "rate_tol");
        positive(rc.numeric.q_tol, "q_tol");
        positive(rc.numeric.dark_threshold, "dark_threshold");
        if (rc.numeric.t_eval_us < 0.0)
            throw ConfigError(pc.source, ns->line, "t_eval_us must be >= 0");
        if (rc.numeric.n_max < 0 || rc.numeric.n_max > 100000)
            throw ConfigError(pc.source, ns->line,
                              "n_max must lie in [0, 100000]");
    }

    if (const ConfigSection* os_ = pc.find("output")) {
        SectionReader r(pc.source, *os_);
        rc.output.basename = r.str({"basename"}, "");
        const int bn_line = r.line_of({"basename"});
        r.finish();
        if (rc.output.basename.find('/') != std::string::npos ||
            rc.output.basename.find('\\') != std::string::npos)
            throw ConfigError(pc.source, bn_line,
                              "basename must not contain path separators");
    }
    if (rc.output.basename.empty()) {
        // default to the config file stem
        std::string stem = source_name;
        const std::size_t slash = stem.find_last_of("/\\");
        if (slash != std::string::npos) stem = stem.substr(slash + 1);
        const std::size_t dot = stem.find_last_of('.');
        if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
        rc.output.basename = stem.empty() ? "run" : stem;
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

ScanAxis RunConfig::axis1() const {
    return ScanAxis{scan.axis, linspace(scan.min, scan.max, scan.points)};
}

ScanAxis RunConfig::axis2() const {
    if (!scan.has_axis2()) return ScanAxis{};
    return ScanAxis{scan.axis2, linspace(scan.min2, scan.max2, scan.points2)};
}

ScanOptions RunConfig::scan_options() const {
    ScanOptions o;
    o.rate_tol = numeric.rate_tol;
    o.q_tol = numeric.q_tol;
    o.t_eval_us = numeric.t_eval_us;
    o.dark_threshold = numeric.dark_threshold;
    o.rate.rtol = numeric.rtol;
    o.rate.atol = numeric.atol;
    return o;
}

std::string RunConfig::serialize_resolved() const {
    std::ostringstream os;
    os << "[model]\n";
    os << "kind = \"" << kind_name(model.kind) << "\"\n";
    os << "gamma31_MHz = " << fmt_double(model.gamma31) << "\n";
    os << "gamma32_MHz = " << fmt_double(model.gamma32) << "\n";
    os << "gamma41_MHz = " << fmt_double(model.gamma41) << "\n";
    os << "gamma42_MHz = " << fmt_double(model.gamma42) << "\n";
    os << "beta = " << fmt_double(model.beta) << "\n";
    if (model.kind == ModelKind::DoubleLambda)
        os << "omega_MHz = " << fmt_double(model.omega) << "\n";
    os << "omega_p_MHz = " << fmt_double(drive.omega_p) << "\n";
    os << "omega_c_MHz = " << fmt_double(drive.omega_c) << "\n";
    if (model.kind == ModelKind::NType)
        os << "omega_s_MHz = " << fmt_double(drive.omega_s) << "\n";
    os << "delta_p_MHz = " << fmt_double(drive.delta_p) << "\n";
    os << "delta_c_MHz = " << fmt_double(drive.delta_c) << "\n";
    if (model.kind == ModelKind::NType)
        os << "delta_s_MHz = " << fmt_double(drive.delta_s) << "\n";
    os << "initial_level = " << initial_level << "\n";
    if (has_scan) {
        os << "\n[scan]\n";
        os << "axis = \"" << scan.axis << "\"\n";
        os << "min_MHz = " << fmt_double(scan.min) << "\n";
        os << "max_MHz = " << fmt_double(scan.max) << "\n";
        os << "points = " << scan.points << "\n";
        if (scan.has_axis2()) {
            os << "axis2 = \"" << scan.axis2 << "\"\n";
            os << "min2_MHz = " << fmt_double(scan.min2) << "\n";
            os << "max2_MHz = " << fmt_double(scan.max2) << "\n";
            os << "points2 = " << scan.points2 << "\n";
        }
    }
    os << "\n[numeric]\n";
    os << "rtol = " << fmt_double(numeric.rtol) << "\n";
    os << "atol = " << fmt_double(numeric.atol) << "\n";
    os << "rate_tol = " << fmt_double(numeric.rate_tol) << "\n";
    os << "q_tol = " << fmt_double(numeric.q_tol) << "\n";
    os << "t_eval_us = " << fmt_double(numeric.t_eval_us) << "\n";
    os << "dark_threshold = " << fmt_double(numeric.dark_threshold) << "\n";
    os << "n_max = " << numeric.n_max << "\n";
    os << "\n[output]\n";
    os << "basename = \"" << output.basename << "\"\n";
    return os.str();
}

}  // namespace gfatom

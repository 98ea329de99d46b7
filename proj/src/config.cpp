#include "levyshe/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "levyshe/errors.hpp"
#include "levyshe/report.hpp"

namespace levyshe {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

ConfigValue parse_value(const std::string& raw, int lineno) {
    std::string v = trim(raw);
    if (v.empty()) throw Error(ErrorCode::ConfigInvalid, "config line " + std::to_string(lineno) + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw Error(ErrorCode::ConfigInvalid, "config line " + std::to_string(lineno) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '[') {
        if (v.back() != ']')
            throw Error(ErrorCode::ConfigInvalid, "config line " + std::to_string(lineno) + ": unterminated array");
        std::vector<double> arr;
        std::string body = v.substr(1, v.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            char* end = nullptr;
            double x = std::strtod(item.c_str(), &end);
            if (end == item.c_str() || *end != '\0')
                throw Error(ErrorCode::ConfigInvalid,
                            "config line " + std::to_string(lineno) + ": bad array element '" + item + "'");
            arr.push_back(x);
        }
        return arr;
    }
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw Error(ErrorCode::ConfigInvalid,
                    "config line " + std::to_string(lineno) + ": bad value '" + v + "'");
    return x;
}

class TableReader {
  public:
    TableReader(const ConfigTree& tree, const std::string& section) : section_(section) {
        auto it = tree.find(section);
        if (it != tree.end()) table_ = &it->second;
    }
    bool present() const { return table_ != nullptr; }
    bool has(const std::string& key) const { return table_ && table_->count(key) > 0; }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return expect<double>(key, "number");
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        return expect<std::string>(key, "string");
    }
    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        return expect<bool>(key, "boolean");
    }
    std::vector<double> array(const std::string& key, const std::vector<double>& fallback) const {
        if (!has(key)) return fallback;
        return expect<std::vector<double>>(key, "array");
    }

  private:
    template <typename T>
    T expect(const std::string& key, const char* what) const {
        const ConfigValue& v = table_->at(key);
        if (!std::holds_alternative<T>(v))
            throw Error(ErrorCode::ConfigInvalid,
                        "config: [" + section_ + "] " + key + " must be a " + what);
        return std::get<T>(v);
    }
    std::string section_;
    const ConfigTable* table_ = nullptr;
};

LevyMeasureSpec measure_from_table(const TableReader& m) {
    std::string family = m.str("family", "");
    std::transform(family.begin(), family.end(), family.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (family == "pointmass" || family == "point_mass")
        return LevyMeasureSpec::point_mass(m.number("z0", 1.0), m.number("mass", 1.0));
    if (family == "pareto" || family == "paretotail")
        return LevyMeasureSpec::pareto(m.number("alpha", 1.0), m.number("scale", 1.0));
    if (family == "stable" || family == "stablelike")
        return LevyMeasureSpec::stable_like(m.number("alpha", 0.5), m.number("c", 1.0));
    if (family == "logtail" || family == "log_tail")
        return LevyMeasureSpec::log_tail(m.number("beta", 2.0));
    if (family == "truncexp" || family == "truncatedexp")
        return LevyMeasureSpec::truncated_exp(m.number("rate", 1.0));
    throw Error(ErrorCode::ConfigInvalid,
                "config: unknown measure family '" + family + "' (pointmass|pareto|stable|logtail|truncexp)");
}

Box region_from(const TableReader& e, int d) {
    Box b;
    b.d = d;
    std::vector<double> lo = e.array("region_lo", std::vector<double>(d, 0.0));
    std::vector<double> hi = e.array("region_hi", std::vector<double>(d, 1.0));
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
        throw Error(ErrorCode::ConfigInvalid, "config: region_lo/region_hi must have d entries");
    for (int i = 0; i < d; ++i) {
        if (!(hi[i] > lo[i]))
            throw Error(ErrorCode::ConfigInvalid, "config: region must have positive volume");
        b.lo[i] = lo[i];
        b.hi[i] = hi[i];
    }
    return b;
}

}  // namespace

ConfigTree parse_config_text(const std::string& text) {
    ConfigTree tree;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = std::string::npos;
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                hash = i;
                break;
            }
        }
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::ConfigInvalid,
                            "config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw Error(ErrorCode::ConfigInvalid,
                            "config line " + std::to_string(lineno) + ": empty section name");
            tree[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigInvalid,
                        "config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty() || section.empty())
            throw Error(ErrorCode::ConfigInvalid,
                        "config line " + std::to_string(lineno) + ": key outside a [section]");
        tree[section][key] = parse_value(line.substr(eq + 1), lineno);
    }
    return tree;
}

std::string serialize_config_tree(const ConfigTree& tree) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [section, table] : tree) {
        if (!first) os << "\n";
        first = false;
        os << "[" << section << "]\n";
        for (const auto& [key, value] : table) {
            os << key << " = ";
            if (std::holds_alternative<double>(value)) {
                os << format_number(std::get<double>(value));
            } else if (std::holds_alternative<std::string>(value)) {
                os << '"' << std::get<std::string>(value) << '"';
            } else if (std::holds_alternative<bool>(value)) {
                os << (std::get<bool>(value) ? "true" : "false");
            } else {
                const auto& arr = std::get<std::vector<double>>(value);
                os << "[";
                for (std::size_t i = 0; i < arr.size(); ++i)
                    os << (i ? ", " : "") << format_number(arr[i]);
                os << "]";
            }
            os << "\n";
        }
    }
    return os.str();
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "tails") return ExperimentKind::Tails;
    if (name == "simulate") return ExperimentKind::Simulate;
    if (name == "mc-tail") return ExperimentKind::McTail;
    if (name == "growth-test") return ExperimentKind::GrowthTest;
    if (name == "peaks") return ExperimentKind::Peaks;
    throw Error(ErrorCode::ConfigInvalid, "unknown experiment '" + name + "'");
}

const char* experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Tails: return "tails";
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::McTail: return "mc-tail";
        case ExperimentKind::GrowthTest: return "growth-test";
        case ExperimentKind::Peaks: return "peaks";
    }
    return "?";
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ConfigTree tree = parse_config_text(text);
    for (const auto& [section, _] : tree) {
        if (section != "measure" && section != "model" && section != "experiment" &&
            section != "output")
            throw Error(ErrorCode::ConfigInvalid, "config: unknown section [" + section + "]");
    }
    ExperimentConfig cfg;
    TableReader m(tree, "measure"), mo(tree, "model"), e(tree, "experiment"), o(tree, "output");
    if (!m.present()) throw Error(ErrorCode::ConfigInvalid, "config: missing [measure] section");
    cfg.measure = measure_from_table(m);

    cfg.model.d = static_cast<int>(mo.number("d", 1));
    cfg.model.kappa = mo.number("kappa", 1.0 / (2.0 * M_PI));
    cfg.model.t = mo.number("t", 1.0);
    if (mo.has("drift")) cfg.model.drift = mo.number("drift", 0.0);
    cfg.model.validate();
    if (cfg.model.d > 3)
        throw Error(ErrorCode::ConfigInvalid, "config: experiments support d <= 3");

    cfg.levels_min = e.number("levels_min", cfg.levels_min);
    cfg.levels_max = e.number("levels_max", cfg.levels_max);
    cfg.levels_per_decade = static_cast<int>(e.number("levels_per_decade", cfg.levels_per_decade));
    cfg.seed = static_cast<std::uint64_t>(e.number("seed", 1));
    cfg.replicates = static_cast<std::size_t>(e.number("replicates", 10000));
    if (e.has("estimand")) cfg.estimand = estimand_from_name(e.str("estimand", "ybar"));
    cfg.epsilon = e.number("epsilon", -1.0);
    cfg.padding = e.number("padding", -1.0);
    cfg.region = region_from(e, cfg.model.d);
    cfg.grid_n = static_cast<int>(e.number("grid_n", 33));
    cfg.threads = static_cast<int>(e.number("threads", 0));
    cfg.write_replicates = e.boolean("write_replicates", false);
    if (e.has("which")) cfg.which = growth_tail_from_name(e.str("which", "tau"));
    cfg.rate = RateFunction::power_log(e.number("rate_a", 0.5), e.number("rate_b", 1.0));
    cfg.K = e.number("K", 1.0);
    cfg.n_max = static_cast<std::uint64_t>(e.number("n_max", 100000));
    cfg.delta = e.number("delta", -1.0);
    cfg.runs = static_cast<std::uint64_t>(e.number("runs", 1));
    if (e.has("event_kind")) cfg.event_kind = event_kind_from_name(e.str("event_kind", "v"));

    cfg.out_dir = o.str("dir", "out");
    cfg.out_format = o.str("format", "csv");
    if (cfg.out_format != "csv" && cfg.out_format != "json" && cfg.out_format != "both")
        throw Error(ErrorCode::ConfigInvalid, "config: output format must be csv|json|both");

    if (!(cfg.levels_min > 0.0) || !(cfg.levels_max > cfg.levels_min))
        throw Error(ErrorCode::ConfigInvalid, "config: need 0 < levels_min < levels_max");

    cfg.fingerprint = fingerprint_hex(cfg.to_text() + "|seed=" + std::to_string(cfg.seed));
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

std::string ExperimentConfig::to_text() const {
    ConfigTree tree;
    ConfigTable& m = tree["measure"];
    switch (measure.kind()) {
        case FamilyKind::PointMass:
            m["family"] = std::string("pointmass");
            m["z0"] = measure.param("z0");
            m["mass"] = measure.param("mass");
            break;
        case FamilyKind::ParetoTail:
            m["family"] = std::string("pareto");
            m["alpha"] = measure.param("alpha");
            m["scale"] = measure.param("scale");
            break;
        case FamilyKind::StableLike:
            m["family"] = std::string("stable");
            m["alpha"] = measure.param("alpha");
            m["c"] = measure.param("c");
            break;
        case FamilyKind::LogTail:
            m["family"] = std::string("logtail");
            m["beta"] = measure.param("beta");
            break;
        case FamilyKind::TruncatedExp:
            m["family"] = std::string("truncexp");
            m["rate"] = measure.param("rate");
            break;
        case FamilyKind::Custom:
            throw Error(ErrorCode::ConfigInvalid, "custom measures are not serializable");
    }
    ConfigTable& mo = tree["model"];
    mo["d"] = static_cast<double>(model.d);
    mo["kappa"] = model.kappa;
    mo["t"] = model.t;
    if (model.drift) mo["drift"] = *model.drift;

    ConfigTable& e = tree["experiment"];
    e["levels_min"] = levels_min;
    e["levels_max"] = levels_max;
    e["levels_per_decade"] = static_cast<double>(levels_per_decade);
    e["seed"] = static_cast<double>(seed);
    e["replicates"] = static_cast<double>(replicates);
    e["estimand"] = std::string(estimand_name(estimand));
    e["epsilon"] = epsilon;
    e["padding"] = padding;
    std::vector<double> lo(model.d), hi(model.d);
    for (int i = 0; i < model.d; ++i) {
        lo[i] = region.lo[i];
        hi[i] = region.hi[i];
    }
    e["region_lo"] = lo;
    e["region_hi"] = hi;
    e["grid_n"] = static_cast<double>(grid_n);
    e["threads"] = static_cast<double>(threads);
    e["write_replicates"] = write_replicates;
    e["which"] = std::string(growth_tail_name(which));
    e["rate_a"] = rate.a;
    e["rate_b"] = rate.b;
    e["K"] = K;
    e["n_max"] = static_cast<double>(n_max);
    e["delta"] = delta;
    e["runs"] = static_cast<double>(runs);
    e["event_kind"] = std::string(event_kind_name(event_kind));

    ConfigTable& o = tree["output"];
    o["dir"] = out_dir;
    o["format"] = out_format;
    return serialize_config_tree(tree);
}

void ExperimentConfig::validate_for(ExperimentKind kind) const {
    ConditionReport rep = check_conditions(measure, model);
    auto fail = [&](const std::string& need) {
        std::string msg = "config invalid for '" + std::string(experiment_kind_name(kind)) +
                          "': " + need;
        for (const auto& f : rep.failures) msg += "; " + f;
        throw Error(ErrorCode::ConfigInvalid, msg);
    };
    switch (kind) {
        case ExperimentKind::Tails:
            if (!rep.mild_solution_exists) fail("the existence conditions must hold");
            if (!rep.local_sup_finite) fail("the local-supremum condition must hold");
            break;
        case ExperimentKind::Simulate:
            if (!rep.mild_solution_exists) fail("the existence conditions must hold");
            break;
        case ExperimentKind::McTail:
            switch (estimand) {
                case Estimand::PointValue:
                case Estimand::MaxContribution:
                    if (!rep.mild_solution_exists) fail("the existence conditions must hold");
                    break;
                case Estimand::RegionSum:
                case Estimand::RegionPeak:
                    if (!rep.local_sup_finite) fail("the local-supremum condition must hold");
                    break;
                case Estimand::RegionSupGrid:
                    if (!rep.mild_solution_exists) fail("the existence conditions must hold");
                    if (rep.sup_infinite)
                        fail("local suprema are a.s. infinite for this measure");
                    break;
            }
            break;
        case ExperimentKind::GrowthTest:
        case ExperimentKind::Peaks: {
            bool cell = (kind == ExperimentKind::Peaks && event_kind == EventKind::LatticePeak) ||
                        (kind == ExperimentKind::GrowthTest && which != GrowthTail::KernelPeak);
            if (cell) {
                if (!rep.mild_solution_exists) fail("the existence conditions must hold");
            } else if (!rep.local_sup_finite) {
                fail("the local-supremum condition must hold");
            }
            if (model.d == 1 && !rep.q_condition)
                fail("d=1 requires some q in (0,2) with M_q(1) < inf");
            break;
        }
    }
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace levyshe

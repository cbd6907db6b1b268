#include "cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/version.hpp>

#include "cli/csv.hpp"
#include "cli/ingest.hpp"
#include "ltest/classic.hpp"
#include "ltest/error.hpp"
#include "ltest/l_test.hpp"
#include "ltest/mcfree.hpp"
#include "ltest/mtp.hpp"
#include "ltest/version.hpp"

namespace ltest::cli {

using nlohmann::json;

namespace {

using clock_type = std::chrono::steady_clock;

[[noreturn]] void config_error(const std::string& path, const std::string& why) {
    throw Error(ErrorCode::ConfigError, path + ": " + why);
}

long long get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) config_error(path, "expected an integer");
    return v.get<long long>();
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    return v.get<double>();
}

void set_field(sim::ScenarioConfig& cfg, const std::string& key, const json& v, const std::string& path) {
    if (key == "id") {
        if (!v.is_string()) config_error(path, "expected a string");
        cfg.id = v.get<std::string>();
    } else if (key == "n") {
        cfg.n = get_int(v, path);
    } else if (key == "d") {
        cfg.d = get_int(v, path);
    } else if (key == "k") {
        cfg.k = get_int(v, path);
    } else if (key == "k1") {
        cfg.k1 = get_int(v, path);
    } else if (key == "k2") {
        cfg.k2 = get_int(v, path);
    } else if (key == "amp") {
        cfg.amp = get_number(v, path);
    } else if (key == "rho") {
        cfg.rho = get_number(v, path);
    } else if (key == "alpha") {
        cfg.alpha = get_number(v, path);
    } else if (key == "reps") {
        cfg.reps = static_cast<int>(get_int(v, path));
    } else if (key == "M") {
        const long long m = get_int(v, path);
        if (m < 1) config_error(path, "must be at least 1");
        cfg.M = static_cast<std::size_t>(m);
    } else if (key == "seed") {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            config_error(path, "expected a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    } else if (key == "cv_folds") {
        cfg.cv_folds = static_cast<int>(get_int(v, path));
    } else if (key == "tuning_repeats") {
        cfg.tuning_repeats = static_cast<int>(get_int(v, path));
    } else if (key == "block_orthogonal") {
        if (!v.is_boolean()) config_error(path, "expected true or false");
        cfg.block_orthogonal = v.get<bool>();
    } else if (key == "beta_pattern") {
        const auto p = v.is_string() ? sim::parse_beta_pattern(v.get<std::string>()) : std::nullopt;
        if (!p) config_error(path, "expected random_signs, dense_alternating or dense_nonnegative");
        cfg.beta_pattern = *p;
    } else if (key == "column_norm") {
        const auto p = v.is_string() ? sim::parse_column_norm(v.get<std::string>()) : std::nullopt;
        if (!p) config_error(path, "expected unit or sqrt_n");
        cfg.column_norm = *p;
    } else if (key == "violation") {
        if (v.is_string()) {
            const auto kind = sim::parse_violation(v.get<std::string>());
            if (!kind) config_error(path, "unknown violation '" + v.get<std::string>() + "'");
            cfg.violation.kind = *kind;
        } else if (v.is_object()) {
            for (const auto& [vk, vv] : v.items()) {
                const std::string sub = path + "." + vk;
                if (vk == "kind") {
                    const auto kind = vv.is_string() ? sim::parse_violation(vv.get<std::string>()) : std::nullopt;
                    if (!kind) config_error(sub, "expected none, t_errors, gamma_errors, heteroskedastic or nonlinear");
                    cfg.violation.kind = *kind;
                } else if (vk == "param") {
                    cfg.violation.param = get_number(vv, sub);
                } else {
                    config_error(sub, "unknown key");
                }
            }
        } else {
            config_error(path, "expected a string or an object");
        }
    } else if (key == "violation.param") {
        cfg.violation.param = get_number(v, path);
    } else {
        config_error(path, "unknown key");
    }
}

void apply_object(sim::ScenarioConfig& cfg, const json& obj, const std::string& path, bool allow_sweep) {
    if (!obj.is_object()) config_error(path, "expected an object");
    for (const auto& [key, v] : obj.items()) {
        if (allow_sweep && key == "sweep") continue;
        set_field(cfg, key, v, path + "." + key);
    }
}

std::string value_label(const json& v) {
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    return v.dump();
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadGroupSize:
        case ErrorCode::BadLevel:
        case ErrorCode::BadArgument:
            return kUsage;
        case ErrorCode::ParseError:
        case ErrorCode::MissingColumn:
        case ErrorCode::ColumnConflict:
        case ErrorCode::NonNumeric:
        case ErrorCode::TooFewRows:
        case ErrorCode::ConfigError:
            return kData;
        case ErrorCode::RankDeficient:
        case ErrorCode::DegenerateResidual:
        case ErrorCode::NotConverged:
        case ErrorCode::NullDirection:
        case ErrorCode::ZeroInput:
        case ErrorCode::SingularGradient:
        case ErrorCode::BadRegime:
            return kNumerical;
    }
    return kNumerical;
}

SimulationConfig parse_simulation_config(const json& doc) {
    if (!doc.is_object()) config_error("$", "expected an object");
    SimulationConfig out;
    sim::ScenarioConfig defaults;
    const json* scenarios = nullptr;
    for (const auto& [key, v] : doc.items()) {
        const std::string path = "$." + key;
        if (key == "schema") {
            if (get_int(v, path) != 1) config_error(path, "only schema 1 is supported");
        } else if (key == "methods") {
            if (!v.is_array() || v.empty()) config_error(path, "expected a nonempty array");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string p = path + "[" + std::to_string(i) + "]";
                const auto m = v[i].is_string() ? parse_method(v[i].get<std::string>()) : std::nullopt;
                if (!m) config_error(p, "unknown method");
                out.methods.push_back(*m);
            }
        } else if (key == "method_reps") {
            if (!v.is_object()) config_error(path, "expected an object");
            for (const auto& [mk, mv] : v.items()) {
                const auto m = parse_method(mk);
                if (!m) config_error(path + "." + mk, "unknown method");
                const long long reps = get_int(mv, path + "." + mk);
                if (reps < 1) config_error(path + "." + mk, "must be at least 1");
                out.options.method_reps[*m] = static_cast<int>(reps);
            }
        } else if (key == "share_tuning") {
            if (!v.is_boolean()) config_error(path, "expected true or false");
            out.options.share_tuning = v.get<bool>();
        } else if (key == "defaults") {
            apply_object(defaults, v, path, false);
        } else if (key == "scenarios") {
            if (!v.is_array() || v.empty()) config_error(path, "expected a nonempty array");
            scenarios = &v;
        } else {
            config_error(path, "unknown key");
        }
    }
    if (out.methods.empty()) config_error("$.methods", "missing");
    if (!scenarios) config_error("$.scenarios", "missing");

    for (std::size_t i = 0; i < scenarios->size(); ++i) {
        const std::string path = "$.scenarios[" + std::to_string(i) + "]";
        const json& s = (*scenarios)[i];
        sim::ScenarioConfig base = defaults;
        base.id = "s" + std::to_string(i);
        apply_object(base, s, path, true);
        if (s.contains("sweep")) {
            const json& sw = s["sweep"];
            const std::string sp = path + ".sweep";
            if (!sw.is_object()) config_error(sp, "expected an object");
            std::string param;
            const json* values = nullptr;
            for (const auto& [key, v] : sw.items()) {
                if (key == "param") {
                    if (!v.is_string()) config_error(sp + ".param", "expected a string");
                    param = v.get<std::string>();
                } else if (key == "values") {
                    if (!v.is_array() || v.empty()) config_error(sp + ".values", "expected a nonempty array");
                    values = &v;
                } else {
                    config_error(sp + "." + key, "unknown key");
                }
            }
            if (param.empty() || !values) config_error(sp, "needs both param and values");
            if (param == "id" || param == "sweep") config_error(sp + ".param", "cannot sweep '" + param + "'");
            for (std::size_t j = 0; j < values->size(); ++j) {
                sim::ScenarioConfig cfg = base;
                set_field(cfg, param, (*values)[j], sp + ".values[" + std::to_string(j) + "]");
                cfg.id = base.id + "/" + param + "=" + value_label((*values)[j]);
                out.scenarios.push_back(cfg);
            }
        } else {
            out.scenarios.push_back(base);
        }
    }
    for (const auto& cfg : out.scenarios) {
        try {
            sim::validate(cfg);
        } catch (const Error& e) {
            config_error("$.scenarios", e.what());
        }
    }
    return out;
}

std::string power_csv(const std::vector<sim::ScenarioConfig>& scenarios, const std::vector<sim::PowerRecord>& records,
                      bool timing) {
    std::ostringstream os;
    os << "scenario,n,d,k,amp,k1,k2,rho,violation,violation_param,block_orthogonal,beta_pattern,column_norm,alpha,M,"
          "method,reps,failures,rejection_rate,standard_error,nonconverged";
    if (timing) os << ",wall_time";
    os << '\n';
    for (const auto& rec : records) {
        const sim::ScenarioConfig* cfg = nullptr;
        for (const auto& s : scenarios)
            if (s.id == rec.scenario_id) cfg = &s;
        if (!cfg) continue;
        os << csv_escape(cfg->id) << ',' << cfg->n << ',' << cfg->d << ',' << cfg->k << ',' << format_double(cfg->amp)
           << ',' << cfg->k1 << ',' << cfg->k2 << ',' << format_double(cfg->rho) << ','
           << sim::to_string(cfg->violation.kind) << ',' << format_double(cfg->violation.param) << ','
           << (cfg->block_orthogonal ? "true" : "false") << ',' << sim::to_string(cfg->beta_pattern) << ','
           << sim::to_string(cfg->column_norm) << ',' << format_double(cfg->alpha) << ',' << cfg->M << ','
           << to_string(rec.method) << ',' << rec.reps << ',' << rec.failures << ','
           << format_double(rec.rejection_rate) << ',' << format_double(rec.standard_error) << ','
           << rec.nonconverged;
        if (timing) os << ',' << format_double(rec.wall_time);
        os << '\n';
    }
    return os.str();
}

namespace {

json scenario_json(const sim::ScenarioConfig& c) {
    return json{{"id", c.id},
                {"n", c.n},
                {"d", c.d},
                {"k", c.k},
                {"amp", c.amp},
                {"k1", c.k1},
                {"k2", c.k2},
                {"rho", c.rho},
                {"violation", {{"kind", sim::to_string(c.violation.kind)}, {"param", c.violation.param}}},
                {"reps", c.reps},
                {"alpha", c.alpha},
                {"M", c.M},
                {"seed", c.seed},
                {"block_orthogonal", c.block_orthogonal},
                {"beta_pattern", sim::to_string(c.beta_pattern)},
                {"column_norm", sim::to_string(c.column_norm)},
                {"cv_folds", c.cv_folds},
                {"tuning_repeats", c.tuning_repeats}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
    f << text;
}

struct TestArgs {
    std::string data;
    std::string response;
    std::vector<std::string> groups;
    std::string method = "f";
    double alpha = 0.05;
    std::size_t mc_samples = 200;
    std::uint64_t seed = 1;
    int cv_folds = 10;
    int tuning_repeats = 1;
    std::string out = "json";
    bool standardize = false;
    bool intercept = false;
    bool timing = false;
    int threads = 1;
};

json outcome_json(const TestOutcome& o) {
    json j;
    j["method"] = to_string(o.method);
    j["statistic"] = o.statistic;
    j["p_value"] = o.p_value;
    j["mc_samples"] = o.mc_samples ? json(*o.mc_samples) : json(nullptr);
    j["lambda"] = o.meta.lambda ? json(*o.meta.lambda) : json(nullptr);
    if (o.meta.b_star) {
        json b = json::array();
        for (Eigen::Index i = 0; i < o.meta.b_star->size(); ++i) b.push_back((*o.meta.b_star)[i]);
        j["b_star"] = b;
    } else {
        j["b_star"] = nullptr;
    }
    j["mc_seed"] = o.meta.seed ? json(*o.meta.seed) : json(nullptr);
    j["tuning_seed"] = o.meta.tuning_seed ? json(*o.meta.tuning_seed) : json(nullptr);
    j["ge_count"] = o.meta.ge_count ? json(*o.meta.ge_count) : json(nullptr);
    j["nonconverged"] = o.meta.nonconverged;
    j["branch"] = o.meta.branch;
    return j;
}

TestOutcome run_method(Method method, const ModelContext& ctx, const VectorXd& y, const TestArgs& a, const Rng& group_rng) {
    const Rng tuning_rng = group_rng.stream({1});
    const Rng mc_rng = group_rng.stream({2});
    switch (method) {
        case Method::F: return f_test(ctx, y);
        case Method::Pc: return sim::pc_test(ctx, y);
        default: break;
    }
    const SufficientState state = sufficient_state(ctx, y);
    const TuningChoice tuning = tune(ctx, state, tuning_rng, a.cv_folds, a.tuning_repeats);
    switch (method) {
        case Method::L: return l_test(ctx, state, a.mc_samples, mc_rng, tuning, a.threads);
        case Method::McFree: return mcfree_test(ctx, state, tuning);
        case Method::Phi: return sim::phi_test(ctx, state, tuning, a.mc_samples, mc_rng, a.threads);
        case Method::GlassoMc: {
            TestOutcome o = glasso_mc_test(ctx, state, tuning.lambda, a.mc_samples, mc_rng, a.threads);
            o.meta.b_star = tuning.b_star;
            o.meta.tuning_seed = tuning.tuning_seed;
            return o;
        }
        default: break;
    }
    throw Error(ErrorCode::BadArgument, "method not available from the command line");
}

int cmd_test(const TestArgs& a, std::ostream& out) {
    const auto method = parse_method(a.method);
    if (!method || *method == Method::Oracle) throw Error(ErrorCode::BadArgument, "unknown method '" + a.method + "'");
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw Error(ErrorCode::BadLevel, "--alpha must lie in (0, 1)");
    if (a.mc_samples < 1) throw Error(ErrorCode::BadArgument, "--mc-samples must be at least 1");
    if (a.groups.empty()) throw Error(ErrorCode::BadArgument, "at least one --group is required");

    DatasetSpec spec;
    spec.path = a.data;
    spec.response = a.response;
    spec.standardize = a.standardize;
    spec.intercept = a.intercept;
    for (const auto& g : a.groups) spec.groups.push_back(parse_group(g));
    const Dataset data = ingest(spec);

    const Rng master(a.seed);
    json results = json::array();
    int status = kOk;
    std::ostringstream csv;
    csv << "group,k,n,d,method,statistic,p_value,rejected,mc_samples,lambda,tuning_seed,mc_seed,branch,error";
    if (a.timing) csv << ",seconds";
    csv << '\n';
    for (std::size_t g = 0; g < data.designs.size(); ++g) {
        const GroupDesign& design = data.designs[g];
        json r;
        r["group"] = design.name;
        r["k"] = design.k;
        r["n"] = design.X.rows();
        r["d"] = design.X.cols();
        r["columns"] = design.column_names;
        const auto start = clock_type::now();
        std::string error;
        std::optional<TestOutcome> outcome;
        try {
            const ModelContext ctx(design.X, design.k);
            outcome = run_method(*method, ctx, data.y, a, master.stream({static_cast<std::uint64_t>(g)}));
        } catch (const Error& e) {
            error = e.what();
            status = std::max(status, exit_code_for(e.code()));
        }
        const double seconds = std::chrono::duration<double>(clock_type::now() - start).count();
        if (outcome) {
            r.update(outcome_json(*outcome));
            r["rejected"] = outcome->p_value <= a.alpha;
        } else {
            r["method"] = a.method;
            r["error"] = error;
        }
        if (a.timing) r["seconds"] = seconds;
        results.push_back(r);

        csv << csv_escape(design.name) << ',' << design.k << ',' << design.X.rows() << ',' << design.X.cols() << ','
            << a.method << ',';
        if (outcome) {
            csv << format_double(outcome->statistic) << ',' << format_double(outcome->p_value) << ','
                << (outcome->p_value <= a.alpha ? "true" : "false") << ','
                << (outcome->mc_samples ? std::to_string(*outcome->mc_samples) : "") << ','
                << (outcome->meta.lambda ? format_double(*outcome->meta.lambda) : "") << ','
                << (outcome->meta.tuning_seed ? std::to_string(*outcome->meta.tuning_seed) : "") << ','
                << (outcome->meta.seed ? std::to_string(*outcome->meta.seed) : "") << ','
                << csv_escape(outcome->meta.branch) << ',';
        } else {
            csv << ",,,,,,,," << csv_escape(error);
        }
        if (a.timing) csv << ',' << format_double(seconds);
        csv << '\n';
    }

    if (a.out == "csv") {
        out << csv.str();
    } else {
        json report;
        report["schema"] = 1;
        report["command"] = "test";
        report["version"] = LTEST_VERSION;
        report["method"] = a.method;
        report["alpha"] = a.alpha;
        report["seed"] = a.seed;
        report["cv_folds"] = a.cv_folds;
        report["tuning_repeats"] = a.tuning_repeats;
        report["results"] = results;
        out << report.dump(2) << '\n';
    }
    return status;
}

struct SimulateArgs {
    std::string config;
    std::string out_csv;
    std::string manifest;
    int threads = 1;
    bool timing = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    std::ifstream in(a.config, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + a.config + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("$: invalid JSON: ") + e.what());
    }
    SimulationConfig cfg = parse_simulation_config(doc);
    cfg.options.threads = a.threads;

    const auto start = clock_type::now();
    const auto records = sim::run_power_sweep(cfg.scenarios, cfg.methods, cfg.options);
    const double total = std::chrono::duration<double>(clock_type::now() - start).count();

    const std::string table = power_csv(cfg.scenarios, records, a.timing);
    if (a.out_csv.empty() || a.out_csv == "-")
        out << table;
    else
        write_text(a.out_csv, table);

    if (!a.manifest.empty()) {
        json m;
        m["schema"] = 1;
        m["command"] = "simulate";
        m["version"] = LTEST_VERSION;
        m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"boost", BOOST_LIB_VERSION},
                          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
        json methods = json::array();
        for (Method meth : cfg.methods) methods.push_back(to_string(meth));
        m["methods"] = methods;
        json caps = json::object();
        for (const auto& [meth, reps] : cfg.options.method_reps) caps[std::string(to_string(meth))] = reps;
        m["method_reps"] = caps;
        m["share_tuning"] = cfg.options.share_tuning;
        json scen = json::array();
        for (const auto& s : cfg.scenarios) scen.push_back(scenario_json(s));
        m["scenarios"] = scen;
        m["records"] = records.size();
        if (a.timing) {
            m["wall_time_total"] = total;
            json times = json::array();
            for (const auto& r : records)
                times.push_back({{"scenario", r.scenario_id}, {"method", to_string(r.method)}, {"wall_time", r.wall_time}});
            m["wall_times"] = times;
        }
        write_text(a.manifest, m.dump(2) + "\n");
    }
    return kOk;
}

struct AdjustArgs {
    std::string pvalues;
    std::string column;
    std::string procedure;
    double level = 0.05;
    std::string out = "csv";
};

std::vector<double> read_pvalues(const AdjustArgs& a) {
    std::ifstream in(a.pvalues, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + a.pvalues + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<double> p;
    if (!a.column.empty()) {
        const CsvTable table = parse_csv(text);
        std::size_t col = table.header.size();
        for (std::size_t j = 0; j < table.header.size(); ++j)
            if (table.header[j] == a.column) col = j;
        if (col == table.header.size()) throw Error(ErrorCode::MissingColumn, "no column named '" + a.column + "'");
        for (std::size_t i = 0; i < table.rows.size(); ++i)
            p.push_back(parse_number(table.rows[i][col], "row " + std::to_string(i + 1)));
    } else {
        std::istringstream lines(text);
        std::string line;
        std::size_t line_no = 0;
        bool first = true;
        while (std::getline(lines, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            try {
                p.push_back(parse_number(line, "line " + std::to_string(line_no)));
            } catch (const Error&) {
                if (!first) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": '" + line + "' is not a p-value");
            }
            first = false;
        }
    }
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::ParseError, "p-value " + format_double(v) + " outside [0, 1]");
    return p;
}

int cmd_adjust(const AdjustArgs& a, std::ostream& out) {
    const auto procedure = parse_procedure(a.procedure);
    if (!procedure) throw Error(ErrorCode::BadArgument, "unknown procedure '" + a.procedure + "'");
    if (!(a.level > 0.0 && a.level < 1.0)) throw Error(ErrorCode::BadLevel, "--level must lie in (0, 1)");
    const std::vector<double> p = read_pvalues(a);
    const AdjustedResults res = adjust(p, *procedure, a.level);
    if (a.out == "json") {
        json report;
        report["schema"] = 1;
        report["command"] = "adjust";
        report["procedure"] = to_string(*procedure);
        report["level"] = a.level;
        std::size_t count = 0;
        json rows = json::array();
        for (std::size_t i = 0; i < p.size(); ++i) {
            rows.push_back({{"index", i + 1}, {"p_value", p[i]}, {"rejected", static_cast<bool>(res.rejected[i])}});
            count += res.rejected[i] ? 1 : 0;
        }
        report["rejections"] = count;
        report["results"] = rows;
        out << report.dump(2) << '\n';
    } else {
        if (p.empty()) return kOk;
        out << "index,p_value,rejected\n";
        for (std::size_t i = 0; i < p.size(); ++i)
            out << (i + 1) << ',' << format_double(p[i]) << ',' << (res.rejected[i] ? "true" : "false") << '\n';
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact tests for a group of linear-model coefficients", "ltest"};
    app.require_subcommand(1);
    app.set_version_flag("--version", LTEST_VERSION);

    TestArgs ta;
    auto* test = app.add_subcommand("test", "Test H: coefficients of a column group are zero");
    test->add_option("--data", ta.data, "CSV file with a header row")->required();
    test->add_option("--response", ta.response, "Response column")->required();
    test->add_option("--group", ta.groups, "Tested group as name=col1,col2 (repeatable)")->required();
    test->add_option("--method", ta.method, "f, l, mcfree, glasso-mc, pc or phi")
        ->check(CLI::IsMember({"f", "l", "mcfree", "glasso-mc", "pc", "phi"}));
    test->add_option("--alpha", ta.alpha, "Level used for the rejected flag");
    test->add_option("--mc-samples", ta.mc_samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    test->add_option("--seed", ta.seed, "Master seed");
    test->add_option("--cv-folds", ta.cv_folds, "Cross-validation folds")->check(CLI::Range(2, 1000000));
    test->add_option("--tuning-repeats", ta.tuning_repeats, "Averaged tuning draws")->check(CLI::PositiveNumber);
    test->add_option("--out", ta.out, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    test->add_flag("--standardize", ta.standardize, "Center covariates and scale them to unit norm");
    test->add_flag("--intercept", ta.intercept, "Add a constant column to the nuisance block");
    test->add_flag("--timing", ta.timing, "Include wall times (output is then not reproducible)");
    test->add_option("--threads", ta.threads, "Worker threads")->check(CLI::PositiveNumber);

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Run a power/size simulation sweep");
    simulate->add_option("--config", sa.config, "JSON configuration")->required();
    simulate->add_option("--out", sa.out_csv, "Result CSV path (default: stdout)");
    simulate->add_option("--manifest", sa.manifest, "Run manifest JSON path");
    simulate->add_option("--threads", sa.threads, "Worker threads")->check(CLI::PositiveNumber);
    simulate->add_flag("--timing", sa.timing, "Include wall times (output is then not reproducible)");

    AdjustArgs aa;
    auto* adjust_cmd = app.add_subcommand("adjust", "Multiple-testing adjustment of a list of p-values");
    adjust_cmd->add_option("--pvalues", aa.pvalues, "File with one p-value per line, or a CSV with --column")->required();
    adjust_cmd->add_option("--column", aa.column, "CSV column holding the p-values");
    adjust_cmd->add_option("--procedure", aa.procedure, "holm or bh")->required()->check(CLI::IsMember({"holm", "bh"}));
    adjust_cmd->add_option("--level", aa.level, "FWER level (holm) or FDR level (bh)");
    adjust_cmd->add_option("--out", aa.out, "csv or json")->check(CLI::IsMember({"json", "csv"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << LTEST_VERSION << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*test) return cmd_test(ta, out);
        if (*simulate) return cmd_simulate(sa, out);
        if (*adjust_cmd) return cmd_adjust(aa, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

}  // namespace ltest::cli

#ifndef GBRS_CLI_HPP
#define GBRS_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gbrs/dataset.hpp"
#include "gbrs/eval.hpp"
#include "gbrs/gbrct.hpp"
#include "gbrs/roughset.hpp"

namespace gbrs::cli {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Level from GBRS_LOG (error|warn|info|debug), default warn.
inline LogLevel log_level()
{
    const char* v = std::getenv("GBRS_LOG");
    if (!v) return LogLevel::warn;
    std::string s(v);
    if (s == "error") return LogLevel::error;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

inline void log(LogLevel at, const std::string& msg)
{
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (static_cast<int>(at) <= static_cast<int>(log_level()))
        std::cerr << "[gbrs " << names[static_cast<int>(at)] << "] " << msg << "\n";
}

/// Writes to a sibling temp file and renames it over `path`.
inline void write_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Replaces the extension of `path` (or appends when there is none).
inline std::string with_extension(const std::string& path, const std::string& ext)
{
    std::filesystem::path p(path);
    p.replace_extension(ext);
    return p.string();
}

struct RunConfig {
    std::string command;
    std::string data;
    std::optional<std::size_t> label_col;
    bool no_header = false;
    std::string schema;
    std::string method = "gbnrs";
    std::vector<std::string> methods;
    std::optional<double> delta;
    std::optional<std::size_t> lbs;
    std::size_t folds = 5;
    std::size_t knn_k = 1;
    std::uint64_t seed = 0;
    double stop_eps = 0.0;
    std::string radius = "avg";
    std::string out;
    std::size_t jobs = 1;
    bool whole_dataset_reduction = false;
    std::string reduct;   // tree: load instead of computing
    std::string classify; // tree: rows to score
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Fills fields the command line left unset from a JSON config file.
inline void apply_config_file(RunConfig& rc, const nlohmann::json& j, const CLI::App& sub)
{
    auto unset = [&](const char* flag) {
        auto* opt = sub.get_option_no_throw(flag);
        return !opt || opt->count() == 0;
    };
    auto take = [&]<class T>(const char* key, const char* flag, T& field) {
        if (j.contains(key) && unset(flag)) field = j.at(key).get<T>();
    };
    auto take_opt = [&]<class T>(const char* key, const char* flag, std::optional<T>& field) {
        if (j.contains(key) && unset(flag)) field = j.at(key).get<T>();
    };
    take("data", "--data", rc.data);
    take_opt("label_col", "--label-col", rc.label_col);
    take("no_header", "--no-header", rc.no_header);
    take("schema", "--schema", rc.schema);
    take("method", "--method", rc.method);
    take("methods", "--methods", rc.methods);
    take_opt("delta", "--delta", rc.delta);
    take_opt("lbs", "--lbs", rc.lbs);
    take("folds", "--folds", rc.folds);
    take("knn_k", "--knn-k", rc.knn_k);
    take("seed", "--seed", rc.seed);
    take("stop_eps", "--stop-eps", rc.stop_eps);
    take("radius", "--radius", rc.radius);
    take("out", "--out", rc.out);
    take("jobs", "--jobs", rc.jobs);
    take("whole_dataset_reduction", "--whole-dataset-reduction", rc.whole_dataset_reduction);
    take("reduct", "--reduct", rc.reduct);
    take("classify", "--classify", rc.classify);
}

inline void validate(const RunConfig& rc)
{
    if (rc.data.empty()) throw UsageError("--data is required");
    if (rc.folds < 2) throw UsageError("--folds must be at least 2");
    if (rc.knn_k < 1) throw UsageError("--knn-k must be at least 1");
    if (rc.jobs < 1) throw UsageError("--jobs must be at least 1");
    if (rc.lbs && *rc.lbs < 1) throw UsageError("--lbs must be at least 1");
    if (rc.delta && !(*rc.delta >= 0.0)) throw UsageError("--delta must be non-negative");
    if (rc.stop_eps < 0.0) throw UsageError("--stop-eps must be non-negative");
    if (rc.radius != "avg" && rc.radius != "max") throw UsageError("--radius must be avg or max");
}

inline DecisionSystem load(const RunConfig& rc)
{
    LoadOptions lo;
    lo.has_header = !rc.no_header;
    lo.label_column = rc.label_col;
    if (!rc.schema.empty()) lo.declared_kinds = load_schema(rc.schema);
    return load_csv(rc.data, lo);
}

inline EvalConfig eval_config(const RunConfig& rc)
{
    EvalConfig c;
    c.folds = rc.folds;
    c.knn_k = rc.knn_k;
    c.seed = rc.seed;
    c.stop_eps = rc.stop_eps;
    c.lbs = rc.lbs;
    c.delta = rc.delta;
    c.radius = rc.radius == "max" ? RadiusMode::max : RadiusMode::average;
    c.whole_dataset_reduction = rc.whole_dataset_reduction;
    c.jobs = rc.jobs;
    return c;
}

inline Method reduction_method(const std::string& name)
{
    Method m = parse_method(name);
    if (m == Method::original || m == Method::gbrct)
        throw UsageError("--method must be one of prs, nrs, gbnrs, gbprs");
    return m;
}

/// The reduct on the whole normalized dataset. An unset lbs or delta is
/// chosen by the corresponding sweep first.
inline Reduct compute_reduct(const DecisionSystem& ds, Method m, const RunConfig& rc)
{
    EvalConfig cfg = eval_config(rc);
    if (m == Method::gbnrs && !cfg.lbs) {
        auto sw = lbs_sweep(ds, cfg);
        log(LogLevel::info, "lbs chosen by sweep: " + std::to_string(static_cast<std::size_t>(sw.best_value)));
        return sw.best_reduct;
    }
    if (m == Method::nrs && !cfg.delta) {
        auto sw = delta_sweep(ds, cfg);
        log(LogLevel::info, "delta chosen by sweep: " + std::to_string(sw.best_value));
        return sw.best_reduct;
    }
    Oracle o = oracle_for(m, cfg, cfg.lbs.value_or(2), cfg.delta.value_or(0.0));
    return forward_reduction(normalize(ds), o, cfg.stop_eps, cfg.jobs);
}

inline std::string describe(const Reduct& r, const DecisionSystem& ds)
{
    std::ostringstream os;
    os << "selected:";
    for (std::size_t a : r.selected) os << " " << ds.attribute(a).name;
    os << "\ngamma:";
    char buf[32];
    for (double g : r.gamma_trace) {
        std::snprintf(buf, sizeof buf, " %.4f", g);
        os << buf;
    }
    os << "\n";
    return os.str();
}

/// Reads rows to classify, encodes them with the training schema and scales
/// them with the training ranges. A trailing label column is optional.
inline std::pair<DecisionSystem, std::vector<std::optional<int>>>
load_queries(const std::string& path, const DecisionSystem& train, bool has_header)
{
    std::istringstream in(read_file(path));
    std::string line;
    const std::size_t d = train.attribute_count();
    std::vector<double> raw;
    std::vector<std::optional<int>> truth;
    bool skip = has_header;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (gbrs::detail::trim(line).empty()) continue;
        if (skip) {
            skip = false;
            continue;
        }
        auto f = gbrs::detail::split_csv_line(line);
        if (f.size() != d && f.size() != d + 1)
            throw ParseError(path + ": row " + std::to_string(ln) + ": expected " + std::to_string(d) + " or " +
                             std::to_string(d + 1) + " columns");
        for (std::size_t a = 0; a < d; ++a) {
            const AttributeMeta& m = train.attribute(a);
            if (m.kind == AttributeKind::numeric) {
                auto v = gbrs::detail::parse_number(f[a]);
                if (!v) throw ParseError(path + ": row " + std::to_string(ln) + ": non-numeric '" + f[a] + "'");
                raw.push_back(*v);
            } else {
                auto it = std::find(m.categories.begin(), m.categories.end(), f[a]);
                if (it == m.categories.end())
                    throw ParseError(path + ": row " + std::to_string(ln) + ": unknown category '" + f[a] +
                                     "' for '" + m.name + "'");
                raw.push_back(static_cast<double>(it - m.categories.begin()));
            }
        }
        std::optional<int> y;
        if (f.size() == d + 1) {
            const auto& names = train.label_names();
            auto it = std::find(names.begin(), names.end(), f[d]);
            if (it != names.end()) y = static_cast<int>(it - names.begin());
        }
        truth.push_back(y);
    }
    std::vector<int> labels(truth.size(), 0);
    DecisionSystem q(train.name(), train.attributes(), raw, raw, labels, train.label_names(), false);
    return {normalize(q, column_ranges(train)), truth};
}

} // namespace detail

inline int cmd_reduce(const RunConfig& rc, std::ostream& out)
{
    DecisionSystem ds = detail::load(rc);
    Method m = detail::reduction_method(rc.method);
    Reduct r = detail::compute_reduct(ds, m, rc);
    out << detail::describe(r, ds);
    if (!rc.out.empty()) write_atomic(rc.out, to_json(r, ds).dump(2) + "\n");
    return 0;
}

inline int cmd_evaluate(const RunConfig& rc, std::ostream& out)
{
    DecisionSystem ds = detail::load(rc);
    std::vector<Method> methods;
    if (rc.methods.empty()) {
        methods.push_back(parse_method(rc.method));
    } else {
        for (const auto& s : rc.methods) methods.push_back(parse_method(s));
    }
    auto start = std::chrono::steady_clock::now();
    Comparison c = compare(ds, methods, detail::eval_config(rc));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& r : c.reports)
        for (const auto& f : r.flags) log(LogLevel::warn, r.method + ": " + f);
    std::string table = render_text(c);
    out << table;
    log(LogLevel::info, "evaluate finished in " + std::to_string(secs) + " s");
    if (!rc.out.empty()) {
        write_atomic(rc.out, to_json(c).dump(2) + "\n");
        write_atomic(with_extension(rc.out, ".txt"), table);
    }
    return 0;
}

inline int cmd_sweep(const RunConfig& rc, std::ostream& out)
{
    DecisionSystem ds = detail::load(rc);
    Method m = parse_method(rc.method);
    EvalConfig cfg = detail::eval_config(rc);
    SweepResult sw;
    if (m == Method::nrs)
        sw = delta_sweep(ds, cfg);
    else if (m == Method::gbnrs || m == Method::gbrct)
        sw = lbs_sweep(ds, cfg, m);
    else
        throw UsageError("sweep supports --method nrs, gbnrs or gbrct");
    std::string csv = render_csv(sw);
    out << csv;
    out << "best " << sw.parameter << ": " << (sw.parameter == "lbs" ? std::to_string(static_cast<std::size_t>(sw.best_value))
                                                                      : std::to_string(sw.best_value))
        << "  accuracy " << mean_pm_std(sw.best_report.mean, sw.best_report.std) << "\n";
    if (!rc.out.empty()) {
        write_atomic(rc.out, csv);
        write_atomic(with_extension(rc.out, ".best.json"), to_json(sw, ds).dump(2) + "\n");
    }
    return 0;
}

inline int cmd_tree(const RunConfig& rc, std::ostream& out)
{
    DecisionSystem ds = detail::load(rc);
    DecisionSystem nds = normalize(ds);
    Reduct r;
    if (!rc.reduct.empty()) {
        r = reduct_from_json(nlohmann::json::parse(read_file(rc.reduct)), ds.attribute_count());
    } else {
        r = detail::compute_reduct(ds, detail::reduction_method(rc.method), rc);
    }
    if (r.selected.empty()) throw std::runtime_error("reduct is empty; no tree to build");
    BallOptions opt = r.oracle.kind == OracleKind::gbrs ? r.oracle.balls : Oracle::gbnrs(rc.lbs.value_or(2)).balls;
    ConceptTree tree = build_tree(nds, r, opt);
    out << detail::describe(r, ds) << "nodes: " << tree.nodes.size() << "\n";
    if (!rc.out.empty()) {
        write_atomic(with_extension(rc.out, ".dot"), export_dot(tree));
        write_atomic(with_extension(rc.out, ".json"), export_json(tree));
    }
    if (!rc.classify.empty()) {
        auto [q, truth] = detail::load_queries(rc.classify, ds, !rc.no_header);
        std::ostringstream pred;
        pred << "row,label,confident\n";
        std::size_t known = 0, hit = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            auto c = classify(tree, q.row(i));
            pred << i << "," << ds.label_names()[static_cast<std::size_t>(c.label)] << ","
                 << (c.confident ? "yes" : "no") << "\n";
            if (truth[i]) {
                ++known;
                if (*truth[i] == c.label) ++hit;
            }
        }
        out << pred.str();
        if (known) out << "accuracy: " << static_cast<double>(hit) / static_cast<double>(known) << "\n";
        if (!rc.out.empty()) write_atomic(with_extension(rc.out, ".predictions.csv"), pred.str());
    }
    return 0;
}

/// Entry point. Returns the process exit code: 0 on success, 2 on usage
/// errors, 1 on any other failure.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Granular-ball rough set feature selection"};
    app.require_subcommand(1);
    RunConfig rc;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override it)");
        sub->add_option("--data", rc.data, "CSV dataset");
        sub->add_option("--label-col", rc.label_col, "0-based label column (default: last)");
        sub->add_flag("--no-header", rc.no_header, "CSV has no header row");
        sub->add_option("--schema", rc.schema, "JSON sidecar declaring attribute kinds");
        sub->add_option("--method,--mode", rc.method, "prs | nrs | gbnrs | gbprs (evaluate/sweep also: original, gbrct)");
        sub->add_option("--delta", rc.delta, "NRS neighborhood radius (unset: sweep)");
        sub->add_option("--lbs", rc.lbs, "lower bound of ball size (unset: sweep)");
        sub->add_option("--folds", rc.folds, "cross-validation folds");
        sub->add_option("--knn-k", rc.knn_k, "neighbors for kNN");
        sub->add_option("--seed", rc.seed, "fold shuffle seed");
        sub->add_option("--stop-eps", rc.stop_eps, "stop when the best significance is at most this");
        sub->add_option("--radius", rc.radius, "ball radius: avg | max");
        sub->add_option("--out", rc.out, "output path");
        sub->add_option("--jobs", rc.jobs, "worker threads");
    };
    auto* reduce = app.add_subcommand("reduce", "forward attribute reduction on the whole dataset");
    auto* evaluate = app.add_subcommand("evaluate", "cross-validated accuracy per method");
    auto* sweep = app.add_subcommand("sweep", "lbs or delta sweep");
    auto* tree = app.add_subcommand("tree", "build a concept tree and export DOT and JSON");
    for (auto* s : {reduce, evaluate, sweep, tree}) add_common(s);
    evaluate->add_option("--methods", rc.methods, "methods to compare")->delimiter(',');
    evaluate->add_flag("--whole-dataset-reduction", rc.whole_dataset_reduction,
                       "reduce once on all rows instead of per training fold");
    sweep->add_flag("--whole-dataset-reduction", rc.whole_dataset_reduction,
                    "reduce once on all rows instead of per training fold");
    tree->add_option("--reduct", rc.reduct, "reduct JSON to load instead of computing one");
    tree->add_option("--classify", rc.classify, "CSV rows to classify with the tree");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = app.get_subcommands().front();
    rc.command = active->get_name();
    try {
        if (!config_path.empty()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(config_path));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(config_path + ": " + e.what());
            }
            detail::apply_config_file(rc, j, *active);
        }
        detail::validate(rc);
        if (rc.command == "reduce") return cmd_reduce(rc, out);
        if (rc.command == "evaluate") return cmd_evaluate(rc, out);
        if (rc.command == "sweep") return cmd_sweep(rc, out);
        return cmd_tree(rc, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace gbrs::cli

#endif // GBRS_CLI_HPP

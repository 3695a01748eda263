// ocfs: command-line front end for feature selection and one-class SVM
// screening of wafer-test matrices.

#include "ocfs/ocfs.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace ocfs;

struct Globals {
    std::size_t threads = 1;
    bool no_timestamp = false;
};

struct SvmArgs {
    double nu = 0.1;
    std::string kernel = "rbf";
    double gamma = 0.0;  // 0 = median heuristic
    double tol = 1e-6;
    std::size_t max_iter = 10'000'000;

    KernelSpec spec() const {
        KernelSpec k{parse_kernel_kind(kernel), gamma};
        k.validate();
        return k;
    }
    TrainOptions options() const { return {nu, spec(), tol, max_iter}; }
};

void add_svm_options(CLI::App* app, SvmArgs& a) {
    app->add_option("--nu", a.nu, "nu in (0, 1]")->capture_default_str();
    app->add_option("--kernel", a.kernel, "rbf or linear")->capture_default_str();
    app->add_option("--gamma", a.gamma, "RBF width; 0 picks it from the median pairwise distance")
        ->capture_default_str();
    app->add_option("--tol", a.tol, "solver KKT tolerance")->capture_default_str();
    app->add_option("--max-iter", a.max_iter, "solver pair-update limit")->capture_default_str();
}

// Writes to a file or, for "-", to stdout, with an optional timestamp line.
class Output {
  public:
    Output(const std::string& path, const Globals& g, const std::string& what) {
        if (path != "-") file_ = std::make_unique<std::ofstream>(csv::open_out(path));
        if (!g.no_timestamp) stream() << "# ocfs " << what << ' ' << timestamp() << '\n';
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close() {
        stream().flush();
        if (!stream()) fail(Errc::Io, "write failed");
    }

  private:
    static std::string timestamp() {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }
    std::unique_ptr<std::ofstream> file_;
};

std::optional<std::size_t> parse_steps(const std::string& s) {
    if (s == "auto" || s == "AUTO") return std::nullopt;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size() && v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    fail(Errc::InvalidArgument, "--steps must be a positive integer or 'auto'");
}

// ---- gen ----------------------------------------------------------------

struct GenArgs {
    SyntheticSpec spec;
    std::string out = "-";
    std::string labels;
    std::string meta;
};

void run_gen(const GenArgs& a, const Globals& g) {
    const auto d = generate(a.spec);
    Output out(a.out, g, "gen");
    write_csv(out.stream(), d.data);
    out.close();
    if (!a.labels.empty()) {
        Output lab(a.labels, g, "gen labels");
        write_labels(lab.stream(), d.data, d.labels);
        lab.close();
    }
    if (!a.meta.empty()) {
        Output meta(a.meta, g, "gen informative");
        write_id_list(meta.stream(), d.informative_ids);
        meta.close();
    }
}

// ---- rank ---------------------------------------------------------------

struct RankArgs {
    std::string input;
    std::string method = "entropy";
    std::size_t bins = kDefaultInteriorBins;
    double n_factor = kDefaultNFactor;
    std::string out = "-";
};

void run_rank(const RankArgs& a, const Globals& g) {
    const Method method = parse_method(a.method);
    require(method == Method::Made || method == Method::Entropy, Errc::InvalidArgument,
            "rank supports --method made or entropy");
    require(a.bins >= 1, Errc::InvalidArgument, "--bins must be >= 1");
    require(a.n_factor > 0.0, Errc::InvalidArgument, "--n-factor must be > 0");
    const auto m = load_csv(a.input);
    const auto r = method == Method::Made ? rank_by_made(m, a.n_factor) : rank_by_entropy(m, a.bins);
    Output out(a.out, g, "rank");
    write_ranking_csv(out.stream(), r);
    out.close();
}

// ---- select -------------------------------------------------------------

struct SelectArgs {
    std::string input;
    std::string method = "rfe";
    std::size_t k = 10;
    std::size_t batch = 1;
    std::string steps = "5";
    std::size_t bins = kDefaultInteriorBins;
    double n_factor = kDefaultNFactor;
    SvmArgs svm;
    std::string trace;
    std::string out = "-";
};

void run_select(const SelectArgs& a, const Globals& g) {
    const Method method = parse_method(a.method);
    const auto steps = parse_steps(a.steps);
    RfeConfig cfg{a.k, a.batch, a.svm.nu, a.svm.spec(), a.svm.tol, a.svm.max_iter, g.threads};
    require(a.batch >= 1, Errc::InvalidArgument, "--batch must be >= 1");
    cfg.train_options().validate();
    const auto m = load_csv(a.input);

    std::set<std::string> selected;
    std::optional<RfeTrace> trace;
    switch (method) {
        case Method::Rfe: {
            auto res = rfe(m, cfg);
            selected = std::move(res.selected);
            trace = std::move(res.trace);
            break;
        }
        case Method::RfeKmed: {
            auto res = rfe_kmedoid(m, steps, a.k, cfg);
            selected = std::move(res.selected);
            trace = std::move(res.trace);
            break;
        }
        default: {
            PipelineConfig pc;
            pc.k = a.k;
            pc.bins = a.bins;
            pc.n_factor = a.n_factor;
            selected = select_features(m, method, pc);
            require(!selected.empty(), Errc::EmptySelection, "selection is empty");
        }
    }
    Output out(a.out, g, "select");
    // Keep the matrix column order for readability.
    std::vector<std::string> ordered;
    for (const auto& id : m.param_ids())
        if (selected.contains(id)) ordered.push_back(id);
    write_id_list(out.stream(), ordered);
    out.close();
    if (!a.trace.empty()) {
        require(trace.has_value(), Errc::InvalidArgument, "--trace needs --method rfe or rfe_kmed");
        Output t(a.trace, g, "select trace");
        write_trace_csv(t.stream(), *trace);
        t.close();
    }
}

// ---- train --------------------------------------------------------------

struct TrainArgs {
    std::string input;
    std::string features;
    SvmArgs svm;
    std::string out;
};

void run_train(const TrainArgs& a, const Globals& g) {
    const auto opts = a.svm.options();
    opts.validate();
    auto m = load_csv(a.input);
    if (!a.features.empty()) {
        const auto ids = load_id_list(a.features);
        m = restrict(m, std::set<std::string>(ids.begin(), ids.end()));
    }
    const auto res = train(m, opts);
    if (!res.report.converged)
        std::cerr << "warning: solver stopped after " << res.report.iterations
                  << " updates with KKT violation " << res.report.max_kkt_violation << '\n';
    Output out(a.out, g, "train");
    write_model(out.stream(), res.model);
    out.close();
}

// ---- score --------------------------------------------------------------

struct ScoreArgs {
    std::string input;
    std::string model;
    double threshold = 0.0;
    std::string calibration;
    double sigma_variable = 1.0;
    std::string out = "-";
};

void run_score(const ScoreArgs& a, const Globals& g) {
    require(a.sigma_variable >= 0.0, Errc::InvalidArgument, "--sigma-variable must be >= 0");
    const auto model = load_model(a.model);
    const auto m = load_csv(a.input);
    const auto f = decision_all(model, m);
    std::optional<GreyZoneReport> grey;
    if (!a.calibration.empty()) {
        auto in = csv::open_in(a.calibration);
        const auto cal = parse_calibration_csv(in);
        std::vector<std::pair<std::string, double>> scores;
        for (std::size_t i = 0; i < m.n_lots(); ++i) scores.emplace_back(m.lot_ids()[i], f[i]);
        grey = grey_zone(scores, cal, a.sigma_variable);
        std::cerr << "grey zone: " << grey->grey_lot_ids.size() << " of " << m.n_lots() << " lots within "
                  << csv::format_real(grey->sigma_pred) << " of the frontier\n";
    }
    Output out(a.out, g, "score");
    auto& os = out.stream();
    os << "lot,decision,flagged" << (grey ? ",grey" : "") << '\n';
    for (std::size_t i = 0; i < m.n_lots(); ++i) {
        const auto& lot = m.lot_ids()[i];
        os << csv::quote_if_needed(lot) << ',' << csv::format_real(f[i]) << ',' << (f[i] < a.threshold ? 1 : 0);
        if (grey) os << ',' << (grey->grey_lot_ids.contains(lot) ? 1 : 0);
        os << '\n';
    }
    out.close();
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
    std::string labels;
    std::vector<std::string> scores;  // NAME=path
    std::string data;
    std::vector<std::string> methods;
    std::size_t k = 10;
    std::size_t bins = kDefaultInteriorBins;
    double n_factor = kDefaultNFactor;
    std::size_t batch = 1;
    std::string steps = "5";
    double threshold = 0.0;
    SvmArgs svm;
    std::string format = "text";
    std::string out = "-";
};

std::set<std::string> flagged_from_scores(const std::string& path) {
    auto in = csv::open_in(path);
    const auto lines = csv::read_lines(in);
    require(!lines.empty(), Errc::MalformedCsv, "score file '" + path + "' is empty");
    const auto header = csv::split_record(lines[0]);
    std::size_t lot_col = header.size(), flag_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "lot") lot_col = i;
        if (header[i] == "flagged") flag_col = i;
    }
    require(lot_col < header.size() && flag_col < header.size(), Errc::MalformedCsv,
            "score file '" + path + "' needs 'lot' and 'flagged' columns");
    std::set<std::string> flagged;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto f = csv::split_record(lines[r]);
        require(f.size() == header.size(), Errc::MalformedCsv, "ragged row in '" + path + "'");
        if (f[flag_col] == "1") flagged.insert(f[lot_col]);
        else require(f[flag_col] == "0", Errc::MalformedCsv, "flagged must be 0 or 1 in '" + path + "'");
    }
    return flagged;
}

void run_eval(const EvalArgs& a, const Globals& g) {
    require(a.format == "text" || a.format == "csv", Errc::InvalidArgument, "--format must be text or csv");
    require(!a.scores.empty() || !a.methods.empty(), Errc::InvalidArgument, "give --scores and/or --methods");
    require(a.methods.empty() || !a.data.empty(), Errc::InvalidArgument, "--methods needs --data");
    std::vector<Method> methods;
    for (const auto& s : a.methods) methods.push_back(parse_method(s));
    PipelineConfig pc;
    pc.k = a.k;
    pc.nu = a.svm.nu;
    pc.kernel = a.svm.spec();
    pc.tol = a.svm.tol;
    pc.max_iter = a.svm.max_iter;
    pc.threshold = a.threshold;
    pc.n_factor = a.n_factor;
    pc.bins = a.bins;
    pc.batch_remove = a.batch;
    pc.rfe_steps = parse_steps(a.steps);
    pc.threads = g.threads;
    pc.train_options().validate();

    const auto labels = load_labels(a.labels);
    NamedFlags flags;
    for (const auto& entry : a.scores) {
        const auto eq = entry.find('=');
        require(eq != std::string::npos && eq > 0 && eq + 1 < entry.size(), Errc::InvalidArgument,
                "--scores expects NAME=path, got '" + entry + "'");
        flags.emplace_back(entry.substr(0, eq), flagged_from_scores(entry.substr(eq + 1)));
    }
    if (!methods.empty()) {
        const auto m = load_csv(a.data);
        labels.check_against(m);
        for (auto method : methods)
            flags.emplace_back(std::string(method_name(method)), run_pipeline(m, method, pc).flagged);
    }
    const auto table = evaluate(flags, labels);
    Output out(a.out, g, "eval");
    if (a.format == "csv") write_eval_csv(out.stream(), table);
    else write_eval_text(out.stream(), table);
    out.close();
}

// ---- errorbar -----------------------------------------------------------

struct ErrorbarArgs {
    std::string input;
    EnsembleConfig cfg;
    SvmArgs svm;
    std::string out = "-";
    std::string scores_out;
};

void run_errorbar(ErrorbarArgs a, const Globals& g) {
    a.cfg.nu = a.svm.nu;
    a.cfg.kernel = a.svm.spec();
    a.cfg.tol = a.svm.tol;
    a.cfg.max_iter = a.svm.max_iter;
    a.cfg.threads = g.threads;
    const auto m = load_csv(a.input);
    const auto res = ensemble_experiment(m, a.cfg);
    Output out(a.out, g, "errorbar");
    write_calibration_csv(out.stream(), res.calibration);
    out.close();
    if (!a.scores_out.empty()) {
        Output s(a.scores_out, g, "errorbar scores");
        write_score_matrix_csv(s.stream(), res);
        s.close();
    }
}

int exit_code_for(const Error& e) { return is_validation_error(e.code()) ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ocfs: feature selection and one-class SVM screening for wafer-test data"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags win");
    Globals g;
    app.add_option("--threads", g.threads, "worker threads for RFE criteria and the ensemble")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--no-timestamp", g.no_timestamp, "omit the '# ...' timestamp line from outputs");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "write a synthetic data matrix and labels");
    gen_cmd->add_option("--lots", gen.spec.n_lots)->capture_default_str();
    gen_cmd->add_option("--parametric", gen.spec.n_parametric)->capture_default_str();
    gen_cmd->add_option("--yield", gen.spec.n_yield)->capture_default_str();
    gen_cmd->add_option("--bad", gen.spec.n_bad_lots)->capture_default_str();
    gen_cmd->add_option("--informative", gen.spec.n_informative)->capture_default_str();
    gen_cmd->add_option("--shift", gen.spec.defect_shift, "defect shift in column sd")->capture_default_str();
    gen_cmd->add_option("--sparsity", gen.spec.yield_sparsity)->capture_default_str();
    gen_cmd->add_option("--yield-rate", gen.spec.yield_rate)->capture_default_str();
    gen_cmd->add_option("--seed", gen.spec.seed)->capture_default_str();
    gen_cmd->add_option("-o,--out", gen.out, "data CSV ('-' = stdout)")->capture_default_str();
    gen_cmd->add_option("--labels", gen.labels, "labels CSV");
    gen_cmd->add_option("--meta", gen.meta, "informative parameter ids");

    RankArgs rank;
    auto* rank_cmd = app.add_subcommand("rank", "rank parameters by MADe or entropy");
    rank_cmd->add_option("input", rank.input, "data CSV")->required();
    rank_cmd->add_option("--method", rank.method, "made or entropy")->capture_default_str();
    rank_cmd->add_option("--bins", rank.bins, "interior histogram bins")->capture_default_str();
    rank_cmd->add_option("--n-factor", rank.n_factor, "MADe width factor")->capture_default_str();
    rank_cmd->add_option("-o,--out", rank.out)->capture_default_str();

    SelectArgs sel;
    auto* sel_cmd = app.add_subcommand("select", "select a feature subset");
    sel_cmd->add_option("input", sel.input, "data CSV")->required();
    sel_cmd->add_option("--method", sel.method, "rfe, rfe_kmed, made, entropy or both")->capture_default_str();
    sel_cmd->add_option("-k,--target", sel.k, "features to keep")->capture_default_str();
    sel_cmd->add_option("--batch", sel.batch, "features removed per RFE iteration")->capture_default_str();
    sel_cmd->add_option("--steps", sel.steps, "RFE iterations before clustering, or 'auto'")->capture_default_str();
    sel_cmd->add_option("--bins", sel.bins)->capture_default_str();
    sel_cmd->add_option("--n-factor", sel.n_factor)->capture_default_str();
    add_svm_options(sel_cmd, sel.svm);
    sel_cmd->add_option("--trace", sel.trace, "RFE trace CSV");
    sel_cmd->add_option("-o,--out", sel.out, "selected ids")->capture_default_str();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train a one-class SVM model");
    train_cmd->add_option("input", tr.input, "data CSV")->required();
    train_cmd->add_option("--features", tr.features, "id list restricting the columns");
    add_svm_options(train_cmd, tr.svm);
    train_cmd->add_option("-o,--out", tr.out, "model file")->required();

    ScoreArgs sc;
    auto* score_cmd = app.add_subcommand("score", "score lots with a trained model");
    score_cmd->add_option("input", sc.input, "data CSV")->required();
    score_cmd->add_option("--model", sc.model)->required();
    score_cmd->add_option("--threshold", sc.threshold, "flag lots with decision below this")->capture_default_str();
    score_cmd->add_option("--calibration", sc.calibration, "calibration CSV from errorbar");
    score_cmd->add_option("--sigma-variable", sc.sigma_variable, "single-variable spread for the grey zone")
        ->capture_default_str();
    score_cmd->add_option("-o,--out", sc.out)->capture_default_str();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Total/ECC table for one or more detectors");
    eval_cmd->add_option("--labels", ev.labels)->required();
    eval_cmd->add_option("--scores", ev.scores, "NAME=score.csv, repeatable");
    eval_cmd->add_option("--data", ev.data, "data CSV for --methods");
    eval_cmd->add_option("--methods", ev.methods, "pipelines to run")->delimiter(',');
    eval_cmd->add_option("-k", ev.k)->capture_default_str();
    eval_cmd->add_option("--bins", ev.bins)->capture_default_str();
    eval_cmd->add_option("--n-factor", ev.n_factor)->capture_default_str();
    eval_cmd->add_option("--batch", ev.batch)->capture_default_str();
    eval_cmd->add_option("--steps", ev.steps)->capture_default_str();
    eval_cmd->add_option("--threshold", ev.threshold)->capture_default_str();
    add_svm_options(eval_cmd, ev.svm);
    eval_cmd->add_option("--format", ev.format, "text or csv")->capture_default_str();
    eval_cmd->add_option("-o,--out", ev.out)->capture_default_str();

    ErrorbarArgs eb;
    auto* eb_cmd = app.add_subcommand("errorbar", "calibrate score error bars by random feature removal");
    eb_cmd->add_option("input", eb.input, "data CSV")->required();
    eb_cmd->add_option("--models", eb.cfg.n_models)->capture_default_str();
    eb_cmd->add_option("--removed", eb.cfg.n_removed)->capture_default_str();
    eb_cmd->add_option("--draws", eb.cfg.n_draws, "calibration points")->capture_default_str();
    eb_cmd->add_option("--seed", eb.cfg.seed)->capture_default_str();
    add_svm_options(eb_cmd, eb.svm);
    eb_cmd->add_option("-o,--out", eb.out, "calibration CSV")->capture_default_str();
    eb_cmd->add_option("--scores-out", eb.scores_out, "per-lot score matrix CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App* shown = &app;
        for (const auto* sub : app.get_subcommands()) shown = sub;
        std::cerr << shown->help();
        return 1;
    }

    try {
        if (*gen_cmd) run_gen(gen, g);
        else if (*rank_cmd) run_rank(rank, g);
        else if (*sel_cmd) run_select(sel, g);
        else if (*train_cmd) run_train(tr, g);
        else if (*score_cmd) run_score(sc, g);
        else if (*eval_cmd) run_eval(ev, g);
        else if (*eb_cmd) run_errorbar(eb, g);
    } catch (const Error& e) {
        std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

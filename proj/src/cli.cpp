#include "ridgekit/cli.hpp"

#include "ridgekit/error.hpp"
#include "ridgekit/experiments.hpp"
#include "ridgekit/io.hpp"
#include "ridgekit/manifest.hpp"
#include "ridgekit/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <numeric>
#include <sstream>

namespace ridgekit {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string format = "csv";
    std::string output;
    std::string manifest;
};

class Run {
  public:
    Run(const Globals& g, std::ostream& out, std::string command) : g_(g), out_(out) {
        manifest_.command = std::move(command);
        manifest_.seed = g.seed;
        manifest_.threads = resolve_thread_count(g.threads);
    }

    [[nodiscard]] std::size_t threads() const { return manifest_.threads; }
    Json& config() { return manifest_.config; }
    void input(const std::filesystem::path& p) { manifest_.inputs.push_back(p); }

    /// Text goes to --output when given, stdout otherwise.
    void emit(const std::string& text) {
        if (g_.output.empty()) {
            out_ << text;
        } else {
            write_text(g_.output, text);
            manifest_.outputs.push_back(g_.output);
        }
    }
    void also_wrote(const std::filesystem::path& p) { manifest_.outputs.push_back(p); }

    void emit_table(const Table& t) {
        if (g_.format == "json") {
            emit(t.to_json().dump(2) + "\n");
        } else {
            emit(t.to_csv());
        }
    }

    void finish() const {
        std::filesystem::path where;
        if (!g_.manifest.empty()) {
            where = g_.manifest;
        } else if (!g_.output.empty()) {
            where = manifest_path_for(g_.output);
        } else {
            return;
        }
        manifest_.write(where);
    }

  private:
    const Globals& g_;
    std::ostream& out_;
    RunManifest manifest_;
};

std::vector<Eigen::Index> parse_index_list(const std::string& text) {
    std::vector<Eigen::Index> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v < 0) throw std::invalid_argument(item);
            out.push_back(static_cast<Eigen::Index>(v));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "bad list entry '" + item + "'");
        }
    }
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty list");
    return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

struct FitterOptions {
    std::string fitter = "vp";
    int degree = 7;
    int restarts = 3;
    int max_iters = 100;
    double tol = 1e-7;
    double bandwidth = 1.0;

    void add_to(CLI::App* app) {
        app->add_option("--fitter", fitter, "Direction fitter")->check(CLI::IsMember({"vp", "mave", "linear"}));
        app->add_option("--degree", degree, "Polynomial degree used while fitting directions (vp)");
        app->add_option("--restarts", restarts, "Random restarts (vp)");
        app->add_option("--max-iters", max_iters, "Iteration cap");
        app->add_option("--tol", tol, "Convergence tolerance on the subspace step (vp)");
        app->add_option("--bandwidth", bandwidth, "Bandwidth multiplier (mave)");
    }

    [[nodiscard]] FitterSpec spec() const {
        FitterSpec s;
        s.kind = fitter_from_string(fitter);
        s.vp.degree = degree;
        s.vp.n_restarts = restarts;
        s.vp.max_iters = max_iters;
        s.vp.subspace_tol = tol;
        s.mave.bandwidth_rule = bandwidth;
        s.mave.max_iters = max_iters;
        return s;
    }

    [[nodiscard]] Json to_json() const {
        return {{"fitter", fitter}, {"degree", degree}, {"restarts", restarts},
                {"max_iters", max_iters}, {"tol", tol}, {"bandwidth", bandwidth}};
    }
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::InvalidK:
        case ErrorCode::UnsupportedRank:
        case ErrorCode::Io:
        case ErrorCode::Parse:
            return 1;
        default:
            return 2;
    }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Embedded ridge approximations: fitting, qoi extraction, compression and experiments", "ridgekit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--threads", g.threads, "Worker threads (0: all cores; RIDGEKIT_THREADS overrides)");
    app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("-o,--output", g.output, "Output file (stdout when omitted)");
    app.add_option("--manifest", g.manifest, "Manifest path (default <output>.manifest.json)");
    app.set_version_flag("--version", kVersion);

    int status = 0;

    // generate
    auto* gen = app.add_subcommand("generate", "Write synthetic samples (CSV plus sidecar)");
    std::string gen_kind;
    Eigen::Index gen_m = 0;
    Eigen::Index gen_d = 0;
    Eigen::Index gen_nodes = 200;
    Eigen::Index gen_window = 3;
    double gen_noise = 0.0;
    std::string gen_truth;
    gen->add_option("kind", gen_kind, "analytical or localized")->required()->check(CLI::IsMember({"analytical", "localized"}));
    gen->add_option("--m", gen_m, "Number of samples")->required();
    gen->add_option("--d", gen_d, "Input dimension (default 10 analytical, 30 localized)");
    gen->add_option("--nodes", gen_nodes, "Field nodes (localized)");
    gen->add_option("--window", gen_window, "Inputs per node window (localized)");
    gen->add_option("--noise", gen_noise, "Noise standard deviation (localized)");
    gen->add_option("--truth", gen_truth, "Also write the true directions here");
    gen->callback([&] {
        if (g.output.empty()) throw Error(ErrorCode::InvalidArgument, "generate needs --output");
        Run run(g, out, "generate");
        run.config() = {{"kind", gen_kind}, {"m", gen_m}, {"d", gen_d}, {"nodes", gen_nodes},
                        {"window", gen_window}, {"noise", gen_noise}};
        std::vector<Subspace> truth;
        if (gen_kind == "analytical") {
            const auto problem = AnalyticalProblem::create(g.seed, gen_d > 0 ? gen_d : 10);
            const auto s = generate_analytical(problem, gen_m, g.seed);
            write_samples(g.output, s.field, problem.qoi_weights);
            for (Eigen::Index i = 0; i < 3; ++i) truth.push_back(problem.component_direction(i));
        } else {
            SyntheticFieldSpec spec;
            spec.d = gen_d > 0 ? gen_d : 30;
            spec.N = gen_nodes;
            spec.window_width = gen_window;
            spec.noise_sd = gen_noise;
            spec.rng_seed = g.seed;
            const auto field = LocalizedField::create(spec);
            write_samples(g.output, field.sample(gen_m, g.seed), field.weights);
            truth = field.true_directions();
        }
        run.also_wrote(g.output);
        run.also_wrote(sidecar_path(g.output));
        if (!gen_truth.empty()) {
            write_text(gen_truth, directions_to_json(truth).dump(2) + "\n");
            run.also_wrote(gen_truth);
        }
        run.finish();
    });

    // fit-node
    auto* fit_node = app.add_subcommand("fit-node", "Fit a ridge model to one field column");
    std::string fn_samples;
    Eigen::Index fn_node = 0;
    int fn_r = 1;
    int fn_profile = -1;
    FitterOptions fn_fit;
    fit_node->add_option("samples", fn_samples, "Samples CSV")->required()->check(CLI::ExistingFile);
    fit_node->add_option("--node", fn_node, "Column index (0-based)");
    fit_node->add_option("--r", fn_r, "Ridge dimension");
    fit_node->add_option("--profile-degree", fn_profile, "Profile degree (default: --degree)");
    fn_fit.add_to(fit_node);
    fit_node->callback([&] {
        Run run(g, out, "fit-node");
        run.input(fn_samples);
        Json cfg = fn_fit.to_json();
        cfg["node"] = fn_node;
        cfg["r"] = fn_r;
        cfg["profile_degree"] = fn_profile;
        run.config() = cfg;
        const auto file = read_samples(fn_samples);
        if (fn_node < 0 || fn_node >= file.samples.nodes()) {
            throw Error(ErrorCode::InvalidArgument, "node index out of range");
        }
        const SampleSet data{file.samples.X, file.samples.F.col(fn_node)};
        const DirectionFit fit = fit_directions(data, fn_fit.spec(), fn_r, g.seed);
        const int p = fn_profile >= 0 ? fn_profile : fn_fit.degree;
        const NodalRidgeModel model{fit.subspace, fit_profile(fit.subspace, data.X, data.y, p)};
        Json j = model_to_json(model);
        j["fit"] = {{"converged", fit.converged}, {"iterations", fit.iterations}, {"objective", fit.objective}};
        run.emit(j.dump(2) + "\n");
        run.finish();
    });

    // fit-embedded
    auto* fit_emb = app.add_subcommand("fit-embedded", "Fit one ridge model per field node");
    std::string fe_samples;
    int fe_r = 1;
    int fe_profile = 2;
    FitterOptions fe_fit;
    fit_emb->add_option("samples", fe_samples, "Samples CSV")->required()->check(CLI::ExistingFile);
    fit_emb->add_option("--r", fe_r, "Ridge dimension per node");
    fit_emb->add_option("--profile-degree", fe_profile, "Nodal profile degree");
    fe_fit.add_to(fit_emb);
    fit_emb->callback([&] {
        Run run(g, out, "fit-embedded");
        run.input(fe_samples);
        Json cfg = fe_fit.to_json();
        cfg["r"] = fe_r;
        cfg["profile_degree"] = fe_profile;
        run.config() = cfg;
        const auto file = read_samples(fe_samples);
        Vector weights = file.weights;
        if (weights.size() == 0) weights = Vector::Constant(file.samples.nodes(), 1.0 / static_cast<double>(file.samples.nodes()));
        EmbeddedFitOptions opt;
        opt.fitter = fe_fit.spec();
        opt.r_per_node = fe_r;
        opt.profile_degree = fe_profile;
        opt.seed = g.seed;
        opt.threads = run.threads();
        const EmbeddedRidgeModel model = fit_embedded(file.samples, weights, opt);
        run.emit(embedded_to_json(model).dump(2) + "\n");
        if (model.failed_count() > 0) err << "warning: " << model.failed_count() << " node fits failed\n";
        run.finish();
    });

    // extract-qoi
    auto* qoi = app.add_subcommand("extract-qoi", "Qoi ridge from an embedded model");
    std::string eq_model;
    std::string eq_samples;
    Eigen::Index eq_k = 1;
    int eq_degree = 7;
    std::string eq_eval;
    qoi->add_option("model", eq_model, "Embedded model JSON")->required()->check(CLI::ExistingFile);
    qoi->add_option("samples", eq_samples, "Samples CSV (qoi = F * weights)")->required()->check(CLI::ExistingFile);
    qoi->add_option("--k", eq_k, "Qoi ridge dimension");
    qoi->add_option("--degree", eq_degree, "Qoi profile degree");
    qoi->add_option("--cov-samples", eq_eval, "Inputs for the covariance estimate (default: training inputs)")
        ->check(CLI::ExistingFile);
    qoi->callback([&] {
        Run run(g, out, "extract-qoi");
        run.input(eq_model);
        run.input(eq_samples);
        run.config() = {{"k", eq_k}, {"degree", eq_degree}, {"cov_samples", eq_eval}};
        const EmbeddedRidgeModel model = embedded_from_json(read_json(eq_model));
        const auto file = read_samples(eq_samples);
        const Vector y = file.samples.F * model.weights;
        std::optional<Matrix> X_cov;
        if (!eq_eval.empty()) {
            run.input(eq_eval);
            X_cov = read_samples(eq_eval).samples.X;
        }
        const QoiRidgeModel q = extract_qoi_ridge(model, file.samples.X, y, eq_k, eq_degree, X_cov, run.threads());
        Json j = qoi_to_json(q);
        j["eigenvalue_gaps"] = vector_to_json(eigenvalue_gaps(q.spectrum));
        run.emit(j.dump(2) + "\n");
        run.finish();
    });

    // compress
    auto* comp = app.add_subcommand("compress", "Plan which ridge directions to store");
    std::string cp_dirs;
    std::size_t cp_k = 0;
    std::size_t cp_stride = 0;
    std::string cp_method = "recursive";
    comp->add_option("directions", cp_dirs, "Directions or embedded model JSON")->required()->check(CLI::ExistingFile);
    comp->add_option("--k", cp_k, "Nodes to keep")->required();
    comp->add_option("--stride", cp_stride, "Removals per stage (recursive; default N - k)");
    comp->add_option("--method", cp_method, "Plan method")
        ->check(CLI::IsMember({"greedy", "recursive", "kmedoids", "random"}));
    comp->callback([&] {
        Run run(g, out, "compress");
        run.input(cp_dirs);
        run.config() = {{"k", cp_k}, {"stride", cp_stride}, {"method", cp_method}};
        const auto dirs = directions_from_json(read_json(cp_dirs));
        const std::size_t stride = cp_stride > 0 ? cp_stride : std::max<std::size_t>(1, dirs.size() - std::min(cp_k, dirs.size()));
        const CompressionPlan plan = make_plan(cp_method, dirs, cp_k, stride, g.seed);
        std::vector<Subspace> kept;
        for (auto i : plan.retained) kept.push_back(dirs[i]);
        run.emit(plan_to_json(plan, kept).dump(2) + "\n");
        if (plan.stalled) {
            err << "warning: compression stalled at k = " << plan.achieved_k << " (requested " << plan.requested_k
                << ")\n";
        }
        run.finish();
    });

    // recover
    auto* rec = app.add_subcommand("recover", "Rebuild all directions from a plan");
    std::string rc_plan;
    rec->add_option("plan", rc_plan, "Plan JSON with retained_directions")->required()->check(CLI::ExistingFile);
    rec->callback([&] {
        Run run(g, out, "recover");
        run.input(rc_plan);
        const Json j = read_json(rc_plan);
        const CompressionPlan plan = plan_from_json(j);
        const auto v = validate_plan(plan);
        if (!v.ok) {
            for (const auto& p : v.problems) err << "invalid plan: " << p << "\n";
            status = 2;
            return;
        }
        const auto dirs = recover(plan, plan_retained_directions(j));
        run.emit(directions_to_json(dirs).dump(2) + "\n");
        run.finish();
    });

    // validate-plan
    auto* val = app.add_subcommand("validate-plan", "Check a compression plan");
    std::string vp_plan;
    val->add_option("plan", vp_plan, "Plan JSON")->required()->check(CLI::ExistingFile);
    val->callback([&] {
        const auto v = validate_plan(plan_from_json(read_json(vp_plan)));
        if (v.ok) {
            out << "plan ok\n";
        } else {
            for (const auto& p : v.problems) out << "invalid: " << p << "\n";
            status = 2;
        }
    });

    // exp-recovery
    auto* exr = app.add_subcommand("exp-recovery", "Recovery probability of the three-ridge analytical problem");
    std::string er_method = "both";
    int er_trials = 20;
    std::string er_m = "50,100,150,200,250,300,350,400";
    double er_threshold = 0.005;
    int er_profile = 7;
    FitterOptions er_fit;
    exr->add_option("--method", er_method, "embedded, direct or both")
        ->check(CLI::IsMember({"embedded", "direct", "both"}));
    exr->add_option("--trials", er_trials, "Trials per sample size");
    exr->add_option("--m", er_m, "Comma-separated sample sizes");
    exr->add_option("--threshold", er_threshold, "Success threshold on the subspace distance");
    exr->add_option("--profile-degree", er_profile, "Nodal profile degree (embedded)");
    er_fit.add_to(exr);
    exr->callback([&] {
        Run run(g, out, "exp-recovery");
        Json cfg = er_fit.to_json();
        cfg.update({{"method", er_method}, {"trials", er_trials}, {"m", er_m}, {"threshold", er_threshold},
                    {"profile_degree", er_profile}});
        run.config() = cfg;
        RecoveryConfig rc;
        if (er_method == "both") {
            rc.methods = {RecoveryMethod::Embedded, RecoveryMethod::Direct};
        } else {
            rc.methods = {recovery_method_from_string(er_method)};
        }
        rc.fitter = er_fit.spec();
        rc.M_grid = parse_index_list(er_m);
        rc.n_trials = er_trials;
        rc.threshold = er_threshold;
        rc.profile_degree = er_profile;
        rc.seed = g.seed;
        rc.threads = run.threads();
        const auto rows = recovery_probability_experiment(rc);
        Table t;
        t.columns = {"M", "method", "recovery_prob", "component1_prob", "component2_prob", "component3_prob",
                     "failed_fits", "median_distance"};
        for (const auto& r : rows) {
            std::vector<std::string> row{std::to_string(r.M), to_string(r.method), format_double(r.recovery_prob)};
            for (std::size_t c = 0; c < 3; ++c) {
                row.push_back(c < r.component_prob.size() ? format_double(r.component_prob[c]) : "");
            }
            row.push_back(std::to_string(r.failed_fits));
            row.push_back(format_double(r.median_distance));
            t.rows.push_back(std::move(row));
        }
        run.emit_table(t);
        run.finish();
    });

    // exp-compression
    auto* exc = app.add_subcommand("exp-compression", "Reconstruction error after compressing a synthetic field");
    CompressionStudyConfig cs;
    std::string ec_removals = "0,40,80,120,160";
    std::string ec_methods = "recursive,kmedoids,random";
    Eigen::Index ec_d = cs.field.d;
    Eigen::Index ec_nodes = cs.field.N;
    Eigen::Index ec_window = cs.field.window_width;
    double ec_noise = 0.0;
    FitterOptions ec_fit;
    ec_fit.degree = 2;
    ec_fit.restarts = 1;
    exc->add_option("--removals", ec_removals, "Comma-separated removal counts");
    exc->add_option("--methods", ec_methods, "Comma-separated plan methods");
    exc->add_option("--stride", cs.stride, "Removals per recursive stage");
    exc->add_option("--nodes", ec_nodes, "Field nodes");
    exc->add_option("--d", ec_d, "Input dimension");
    exc->add_option("--window", ec_window, "Inputs per node window");
    exc->add_option("--noise", ec_noise, "Noise standard deviation");
    exc->add_option("--m-train", cs.M_train, "Training samples");
    exc->add_option("--m-eval", cs.M_eval, "Held-out samples");
    exc->add_option("--profile-degree", cs.profile_degree, "Nodal profile degree");
    ec_fit.add_to(exc);
    exc->callback([&] {
        Run run(g, out, "exp-compression");
        Json cfg = ec_fit.to_json();
        cfg.update({{"removals", ec_removals}, {"methods", ec_methods}, {"stride", cs.stride}, {"nodes", ec_nodes},
                    {"d", ec_d}, {"window", ec_window}, {"noise", ec_noise}, {"m_train", cs.M_train},
                    {"m_eval", cs.M_eval}, {"profile_degree", cs.profile_degree}});
        run.config() = cfg;
        cs.field.d = ec_d;
        cs.field.N = ec_nodes;
        cs.field.window_width = ec_window;
        cs.field.noise_sd = ec_noise;
        cs.fitter = ec_fit.spec();
        cs.removal_grid.clear();
        for (auto v : parse_index_list(ec_removals)) cs.removal_grid.push_back(static_cast<std::size_t>(v));
        cs.methods = parse_name_list(ec_methods);
        cs.seed = g.seed;
        cs.threads = run.threads();
        const auto rows = compression_study(cs);
        Table t;
        t.columns = {"removed", "method", "epsilon_R", "achieved_k", "plan_valid", "stalled", "fallback_nodes"};
        for (const auto& r : rows) {
            t.rows.push_back({std::to_string(r.removed), r.method, format_double(r.epsilon_R),
                              std::to_string(r.achieved_k), r.plan_valid ? "true" : "false",
                              r.stalled ? "true" : "false", std::to_string(r.fallback_nodes)});
        }
        run.emit_table(t);
        run.finish();
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
            err << "run '" << "ridgekit " << sub->get_name() << " --help' for usage\n";
        } else {
            err << "run 'ridgekit --help' for usage\n";
        }
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return status;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace ridgekit

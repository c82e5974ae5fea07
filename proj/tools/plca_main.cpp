// Command-line front end: fit a latent component model to a CSV table, sample
// from a model, evaluate divergences, and reconstruct the modelled joint.
//
// Machine-readable results go to stdout as key=value lines; messages go to
// stderr. Exit codes: 0 success, 2 usage or input validation failure,
// 1 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "plca/plca.hpp"

namespace {

std::string kv(const char* key, double value) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%s=%.17g", key, value);
    return buf;
}

struct FitArgs {
    std::string input;
    std::size_t k = 1;
    std::uint64_t seed = 0;
    std::size_t restarts = 1;
    std::size_t max_iters = 500;
    double rel_tol = 1e-8;
    std::string out_model;
    std::string trace_path;
    bool transpose = false;
};

int run_fit(const FitArgs& args) {
    if (args.restarts == 0) {
        throw plca::ValidationError("--restarts must be at least 1");
    }
    plca::Matrix raw = plca::io::read_matrix(args.input);
    if (args.transpose) {
        raw = raw.transposed();
    }
    const plca::EmpiricalDistribution pi = plca::build_empirical(raw);

    plca::FitConfig cfg;
    cfg.k = args.k;
    cfg.max_iters = args.max_iters;
    cfg.rel_tol = args.rel_tol;
    cfg.record_trace = true;

    // Restart i runs with seed + i; the winner is the lowest final objective,
    // ties resolved toward the lowest seed.
    std::optional<plca::FitResult> best;
    double best_fobj = 0.0;
    for (std::size_t i = 0; i < args.restarts; ++i) {
        cfg.seed = args.seed + i;
        plca::FitResult result = plca::fit(pi, cfg);
        const double final_fobj = result.trace.records.back().fobj;
        if (!best.has_value() || final_fobj < best_fobj) {
            best_fobj = final_fobj;
            best = std::move(result);
        }
    }

    plca::io::write_model(best->model, args.out_model);
    if (!args.trace_path.empty()) {
        plca::io::write_trace(best->trace, args.trace_path);
    }
    const plca::IterationRecord& last = best->trace.records.back();
    std::cout << kv("fobj", last.fobj) << ' ' << kv("kld", last.kld) << '\n';
    std::cerr << "fit: " << best->trace.records.size() << " iterations, "
              << plca::to_string(best->trace.termination) << '\n';
    return 0;
}

struct SampleArgs {
    std::string model_path;
    std::size_t n = 1;
    std::uint64_t seed = 0;
    std::string out_corpus;
    std::string out_counts;
};

int run_sample(const SampleArgs& args) {
    const plca::PlcaModel model = plca::io::read_model(args.model_path);
    const plca::SampleCorpus corpus = plca::sample_corpus(model, args.n, args.seed);
    plca::io::write_corpus(corpus, model.events(), model.groups(), args.out_corpus);
    if (!args.out_counts.empty()) {
        const plca::Matrix counts =
            plca::corpus_to_counts(corpus, model.events(), model.groups());
        plca::io::write_matrix(counts, args.out_counts);
    }
    std::cerr << "sample: wrote " << corpus.pairs.size() << " pairs\n";
    return 0;
}

struct EvalArgs {
    std::string input;
    std::string corpus_path;
    std::string model_path;
    bool oracle = false;
    std::size_t resolution = 100;
    bool transpose = false;
};

int run_eval(const EvalArgs& args) {
    const plca::PlcaModel model = plca::io::read_model(args.model_path);
    if (args.input.empty() && args.corpus_path.empty()) {
        throw plca::ValidationError("eval needs --input and/or --corpus");
    }
    if (args.oracle && args.input.empty()) {
        throw plca::ValidationError("--oracle needs --input");
    }

    if (!args.input.empty()) {
        plca::Matrix raw = plca::io::read_matrix(args.input);
        if (args.transpose) {
            raw = raw.transposed();
        }
        const plca::EmpiricalDistribution pi = plca::build_empirical(raw);
        std::cout << kv("kld", plca::kld(pi, model)) << ' ' << kv("fobj", plca::fobj(pi, model))
                  << '\n';
        if (args.oracle) {
            const auto result =
                plca::reference::grid_search_fobj(pi, model.classes(), args.resolution);
            std::cout << kv("oracle_fobj", result.fobj) << '\n';
        }
    }
    if (!args.corpus_path.empty()) {
        const plca::io::CorpusFile file = plca::io::read_corpus(args.corpus_path);
        if (file.events != model.events() || file.groups != model.groups()) {
            throw plca::ShapeError("corpus is " + std::to_string(file.events) + "x" +
                                   std::to_string(file.groups) + " but model is " +
                                   std::to_string(model.events()) + "x" +
                                   std::to_string(model.groups()));
        }
        std::cout << kv("sample_loglik", plca::sample_loglik(file.corpus, model)) << '\n';
    }
    return 0;
}

struct ReconstructArgs {
    std::string model_path;
    std::string out;
    double scale = 1.0;
};

int run_reconstruct(const ReconstructArgs& args) {
    if (!(args.scale > 0.0)) {
        throw plca::ValidationError("--scale must be positive");
    }
    const plca::PlcaModel model = plca::io::read_model(args.model_path);
    plca::Matrix joint(model.events(), model.groups());
    for (std::size_t e = 0; e < model.events(); ++e) {
        for (std::size_t g = 0; g < model.groups(); ++g) {
            joint(e, g) = plca::joint_prob(model, e, g) * args.scale;
        }
    }
    plca::io::write_matrix(joint, args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic latent component analysis"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a model to a non-negative CSV table");
    fit->add_option("--input", fit_args.input, "CSV table, rows = events")->required();
    fit->add_option("--k", fit_args.k, "Number of latent classes")->required();
    fit->add_option("--seed", fit_args.seed, "Base seed for initialization");
    fit->add_option("--restarts", fit_args.restarts, "Restarts with seeds seed, seed+1, ...");
    fit->add_option("--max-iters", fit_args.max_iters, "Iteration cap per restart");
    fit->add_option("--rel-tol", fit_args.rel_tol, "Relative objective-improvement threshold");
    fit->add_option("--out-model", fit_args.out_model, "Output model JSON")->required();
    fit->add_option("--trace", fit_args.trace_path, "Output per-iteration trace CSV");
    fit->add_flag("--transpose", fit_args.transpose, "Transpose the input table first");

    SampleArgs sample_args;
    CLI::App* sample = app.add_subcommand("sample", "Draw pairs from a model");
    sample->add_option("--model", sample_args.model_path, "Model JSON")->required();
    sample->add_option("--n", sample_args.n, "Number of draws")->required();
    sample->add_option("--seed", sample_args.seed, "Sampler seed");
    sample->add_option("--out-corpus", sample_args.out_corpus, "Output corpus file")
        ->required();
    sample->add_option("--out-counts", sample_args.out_counts, "Optional counts CSV");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate divergences and likelihoods");
    eval->add_option("--model", eval_args.model_path, "Model JSON")->required();
    eval->add_option("--input", eval_args.input, "CSV table to compare against");
    eval->add_option("--corpus", eval_args.corpus_path, "Corpus for sample_loglik");
    eval->add_flag("--oracle", eval_args.oracle, "Also run the grid-search oracle");
    eval->add_option("--resolution", eval_args.resolution, "Oracle lattice steps");
    eval->add_flag("--transpose", eval_args.transpose, "Transpose the input table first");

    ReconstructArgs rec_args;
    CLI::App* rec = app.add_subcommand("reconstruct", "Write the model joint as CSV");
    rec->add_option("--model", rec_args.model_path, "Model JSON")->required();
    rec->add_option("--out", rec_args.out, "Output CSV")->required();
    rec->add_option("--scale", rec_args.scale, "Rescale the total mass");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (fit->parsed()) {
            return run_fit(fit_args);
        }
        if (sample->parsed()) {
            return run_sample(sample_args);
        }
        if (eval->parsed()) {
            return run_eval(eval_args);
        }
        if (rec->parsed()) {
            return run_reconstruct(rec_args);
        }
    } catch (const plca::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return 1;
    }
    return 1;
}

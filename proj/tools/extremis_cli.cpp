// Command-line front end: fit, score, simulate, recover-support, eval.
//
// Exit codes: 0 success, 2 input error, 3 parameter error, 4 undefined metric.

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "extremis/csv.hpp"
#include "extremis/damex.hpp"
#include "extremis/eval.hpp"
#include "extremis/logistic.hpp"
#include "extremis/subcone.hpp"

using nlohmann::json;

namespace {

struct ParamFlags {
    std::string k = "auto";
    double epsilon = 0.01;
    double p = 0.1;
    std::string membership = "cone";
    bool refine_threshold = false;

    extremis::DamexParams resolve() const {
        extremis::DamexParams params;
        if (k != "auto") {
            long long parsed = 0;
            try {
                std::size_t pos = 0;
                parsed = std::stoll(k, &pos);
                if (pos != k.size()) throw std::invalid_argument(k);
            } catch (const std::exception&) {
                throw extremis::ParameterError("--k must be 'auto' or a positive integer");
            }
            if (parsed <= 0) throw extremis::ParameterError("--k must be positive");
            params.k = static_cast<std::size_t>(parsed);
        }
        params.epsilon = epsilon;
        params.p = p;
        params.membership = extremis::membership_mode_from_string(membership);
        params.threshold_refinement = refine_threshold;
        return params;
    }
};

void add_param_flags(CLI::App* cmd, ParamFlags& flags) {
    cmd->add_option("--k", flags.k, "number of extreme observations, or 'auto' for floor(sqrt(n))")
        ->capture_default_str();
    cmd->add_option("--eps", flags.epsilon, "coordinate tolerance in (0,1)")->capture_default_str();
    cmd->add_option("--p", flags.p, "mass threshold proportion (>= 0)")->capture_default_str();
    cmd->add_option("--membership", flags.membership,
                    "subset membership rule: cone (self-scaled) or rectangle (fixed scale)")
        ->capture_default_str();
    cmd->add_flag("--refine-threshold,!--no-refine-threshold", flags.refine_threshold,
                  "re-apply the mass threshold until the face set is stable");
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

json params_to_json(const extremis::DamexParams& params, std::size_t resolved_k) {
    json j{{"k_mode", params.k ? "fixed" : "auto"},
           {"epsilon", params.epsilon},
           {"p", params.p},
           {"membership_mode", extremis::to_string(params.membership)},
           {"threshold_refinement", params.threshold_refinement}};
    if (resolved_k > 0) j["k"] = resolved_k;
    return j;
}

void write_json_output(const json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw extremis::InvalidInputError("cannot open " + out_path + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw extremis::InvalidInputError("failed writing " + out_path);
}

int cmd_fit(const std::string& train_path, const std::string& out_path, const ParamFlags& flags) {
    auto params = flags.resolve();
    auto data = extremis::read_feature_csv(train_path);
    std::vector<std::string> warnings;
    auto model = extremis::fit(data, params, &warnings);
    print_warnings(warnings);
    model.save_file(out_path);

    const auto& rep = model.representation();
    std::cout << "n=" << data.rows() << " d=" << data.cols() << " k=" << model.k()
              << " eps=" << extremis::format_double(params.epsilon)
              << " p=" << extremis::format_double(params.p) << '\n';
    std::cout << "charged subsets: " << rep.masses.size()
              << "  total mass: " << extremis::format_double(rep.total_mass()) << '\n';
    std::cout << "dimension histogram:";
    for (const auto& [dim, mass] : extremis::dimension_histogram(rep))
        std::cout << ' ' << dim << ':' << extremis::format_double(mass);
    std::cout << '\n';
    return 0;
}

int cmd_score(const std::string& model_path, const std::string& in_path,
              const std::string& out_path) {
    auto model = extremis::DamexModel::load_file(model_path);
    auto data = extremis::read_feature_csv(in_path);
    auto records = model.score_batch(data);

    std::ofstream out(out_path);
    if (!out) throw extremis::InvalidInputError("cannot open " + out_path + " for writing");
    out << "row_index,score,radius,subset\n";
    for (const auto& rec : records) {
        out << rec.index << ',' << extremis::format_double(rec.score) << ','
            << extremis::format_double(rec.radius) << ',';
        auto idx = rec.subset.indices();
        for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? "|" : "") << idx[i];
        out << '\n';
    }
    if (!out) throw extremis::InvalidInputError("failed writing " + out_path);
    std::cout << "scored " << records.size() << " rows -> " << out_path << '\n';
    return 0;
}

int cmd_simulate(std::size_t d, std::size_t K, std::size_t n, double w, std::uint64_t seed,
                 const std::string& out_path, const std::string& spec_out) {
    extremis::Rng rng(seed);
    auto spec = extremis::random_support(d, K, rng, w);
    auto data = extremis::sample(spec, n, seed + 1);

    std::ofstream out(out_path);
    if (!out) throw extremis::InvalidInputError("cannot open " + out_path + " for writing");
    std::vector<std::string> header(d);
    for (std::size_t j = 0; j < d; ++j) header[j] = "f" + std::to_string(j + 1);
    extremis::write_feature_csv(out, data, header);
    if (!out) throw extremis::InvalidInputError("failed writing " + out_path);

    if (!spec_out.empty()) {
        json subsets = json::array();
        for (const auto& s : spec.subsets) subsets.push_back(s.indices());
        write_json_output(
            json{{"d", d}, {"K", K}, {"w", w}, {"seed", seed}, {"subsets", std::move(subsets)}},
            spec_out);
    }
    std::cout << "wrote " << n << " rows in dimension " << d << " -> " << out_path << '\n';
    return 0;
}

int cmd_recover(std::size_t d, std::size_t K, std::size_t n, std::size_t runs, double w,
                std::uint64_t seed, const ParamFlags& flags, const std::string& out_path) {
    auto params = flags.resolve();
    auto report = extremis::support_recovery(d, K, n, runs, params, seed, w);
    json errors = json::array();
    for (int e : report.errors) errors.push_back(e);
    json doc{{"d", report.d},
             {"K", report.K},
             {"n", report.n},
             {"runs", report.runs},
             {"seed", report.seed},
             {"w", w},
             {"params", params_to_json(params, params.resolve_k(n))},
             {"errors", std::move(errors)},
             {"mean_errors", report.mean_errors}};
    write_json_output(doc, out_path);
    if (!out_path.empty())
        std::cout << "mean_errors=" << extremis::format_double(report.mean_errors) << " over "
                  << runs << " runs -> " << out_path << '\n';
    return 0;
}

int cmd_eval(const std::string& recipe_name, const std::vector<std::string>& raw_paths,
             std::size_t runs, std::uint64_t seed, double train_fraction,
             const std::string& baseline_path, const ParamFlags& flags,
             const std::string& out_path) {
    auto recipe = extremis::recipe_from_string(recipe_name);
    auto dataset = extremis::preprocess(recipe, raw_paths, seed);

    extremis::BenchmarkOptions options;
    options.train_fraction = train_fraction;
    if (!baseline_path.empty()) {
        auto table = extremis::read_delimited_file(baseline_path, /*detect_header=*/true);
        std::vector<double> scores(dataset.size(), std::numeric_limits<double>::quiet_NaN());
        for (const auto& row : table.rows) {
            if (row.size() != 2)
                throw extremis::InvalidInputError(baseline_path + ": expected row_index,score");
            double idx_d, score;
            if (!extremis::parse_double(row[0], idx_d) || !extremis::parse_double(row[1], score))
                throw extremis::InvalidInputError(baseline_path + ": non-numeric baseline row");
            auto idx = static_cast<std::size_t>(idx_d);
            if (idx >= dataset.size())
                throw extremis::InvalidInputError(baseline_path + ": row index out of range");
            scores[idx] = score;
        }
        for (double s : scores)
            if (std::isnan(s))
                throw extremis::InvalidInputError(baseline_path +
                                                  ": baseline must cover every dataset row");
        options.baseline_scores = std::move(scores);
    }

    auto params = flags.resolve();
    auto report = extremis::run_benchmark(dataset, params, runs, seed, options);
    print_warnings(report.warnings);

    json per_run = json::array();
    for (const auto& run : report.per_run) {
        json jr{{"n_test", run.n_test},
                {"n_extreme", run.n_extreme},
                {"degenerate", run.degenerate}};
        if (!run.degenerate) {
            jr["anomaly_rate_extreme"] = run.anomaly_rate_extreme;
            jr["roc_auc"] = run.roc;
            jr["pr_auc"] = run.pr;
            if (report.has_baseline) {
                jr["baseline_roc_auc"] = run.baseline_roc;
                jr["baseline_pr_auc"] = run.baseline_pr;
            }
        }
        per_run.push_back(std::move(jr));
    }
    json doc{{"recipe", recipe_name},
             {"n", dataset.size()},
             {"d", dataset.features.cols()},
             {"anomaly_rate", static_cast<double>(dataset.anomaly_count()) /
                                  static_cast<double>(dataset.size())},
             {"runs", report.runs},
             {"degenerate_runs", report.degenerate_runs},
             {"seed", seed},
             {"train_fraction", train_fraction},
             {"params", params_to_json(params, 0)},
             {"n_test", report.n_test},
             {"n_extreme", report.n_extreme},
             {"anomaly_rate_extreme", report.anomaly_rate_extreme},
             {"roc_auc", report.roc_auc},
             {"pr_auc", report.pr_auc},
             {"per_run", std::move(per_run)}};
    if (report.has_baseline) {
        doc["baseline_roc_auc"] = report.baseline_roc_auc;
        doc["baseline_pr_auc"] = report.baseline_pr_auc;
    }
    write_json_output(doc, out_path);
    if (!out_path.empty())
        std::cout << "roc_auc=" << extremis::format_double(report.roc_auc)
                  << " pr_auc=" << extremis::format_double(report.pr_auc) << " over "
                  << report.runs - report.degenerate_runs << " valid runs -> " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse dependence structure of multivariate extremes: fit, score, simulate, "
                 "recover-support, eval"};
    app.require_subcommand(1);

    std::string train_path, model_out;
    ParamFlags fit_flags;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model from a numeric CSV with header");
    fit_cmd->add_option("--train", train_path, "training CSV")->required();
    fit_cmd->add_option("--out", model_out, "model JSON output path")->required();
    add_param_flags(fit_cmd, fit_flags);

    std::string model_path, score_in, score_out;
    auto* score_cmd = app.add_subcommand("score", "score rows with a fitted model");
    score_cmd->add_option("--model", model_path, "model JSON")->required();
    score_cmd->add_option("--in", score_in, "input CSV")->required();
    score_cmd->add_option("--out", score_out, "output CSV (row_index,score,radius,subset)")
        ->required();

    std::size_t sim_d = 10, sim_K = 3, sim_n = 1000;
    double sim_w = 0.1;
    std::uint64_t sim_seed = 1;
    std::string sim_out, sim_spec_out;
    auto* sim_cmd = app.add_subcommand("simulate", "sample the asymmetric logistic model");
    sim_cmd->add_option("--d", sim_d, "dimension")->required();
    sim_cmd->add_option("--K", sim_K, "number of charged subsets")->required();
    sim_cmd->add_option("--n", sim_n, "sample size")->required();
    sim_cmd->add_option("--w", sim_w, "dependence weight in (0,1]")->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    sim_cmd->add_option("--out", sim_out, "data CSV output path")->required();
    sim_cmd->add_option("--spec-out", sim_spec_out, "ground-truth subsets JSON output path");

    std::size_t rec_d = 10, rec_K = 3, rec_n = 50000, rec_runs = 20;
    double rec_w = 0.1;
    std::uint64_t rec_seed = 1;
    std::string rec_out;
    ParamFlags rec_flags;
    rec_flags.epsilon = 0.1;
    rec_flags.refine_threshold = true;
    auto* rec_cmd = app.add_subcommand(
        "recover-support", "support-recovery experiment on simulated data (defaults: eps=0.1, "
                           "cone membership, refined threshold)");
    rec_cmd->add_option("--d", rec_d, "dimension")->required();
    rec_cmd->add_option("--K", rec_K, "number of charged subsets")->required();
    rec_cmd->add_option("--n", rec_n, "sample size per run")->required();
    rec_cmd->add_option("--runs", rec_runs, "number of runs")->capture_default_str();
    rec_cmd->add_option("--w", rec_w, "dependence weight")->capture_default_str();
    rec_cmd->add_option("--seed", rec_seed, "base seed; run r uses seed+r")->capture_default_str();
    rec_cmd->add_option("--out", rec_out, "report JSON output path (default: stdout)");
    add_param_flags(rec_cmd, rec_flags);

    std::string eval_recipe, eval_baseline, eval_out;
    std::vector<std::string> eval_raw;
    std::size_t eval_runs = 20;
    std::uint64_t eval_seed = 1;
    double eval_train_fraction = 0.5;
    ParamFlags eval_flags;
    auto* eval_cmd = app.add_subcommand("eval", "anomaly-detection benchmark on a public dataset");
    eval_cmd->add_option("--recipe", eval_recipe, "shuttle | forestcover | http | SF | SA")
        ->required();
    eval_cmd->add_option("--raw", eval_raw, "raw dataset file(s), concatenated")->required();
    eval_cmd->add_option("--runs", eval_runs, "number of train/test splits")->capture_default_str();
    eval_cmd->add_option("--seed", eval_seed, "base seed")->capture_default_str();
    eval_cmd->add_option("--train-fraction", eval_train_fraction,
                         "share of normal rows used for training")
        ->capture_default_str();
    eval_cmd->add_option("--baseline", eval_baseline,
                         "CSV row_index,abnormality_score covering every dataset row");
    eval_cmd->add_option("--out", eval_out, "report JSON output path (default: stdout)");
    add_param_flags(eval_cmd, eval_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(train_path, model_out, fit_flags);
        if (score_cmd->parsed()) return cmd_score(model_path, score_in, score_out);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_d, sim_K, sim_n, sim_w, sim_seed, sim_out, sim_spec_out);
        if (rec_cmd->parsed())
            return cmd_recover(rec_d, rec_K, rec_n, rec_runs, rec_w, rec_seed, rec_flags, rec_out);
        if (eval_cmd->parsed())
            return cmd_eval(eval_recipe, eval_raw, eval_runs, eval_seed, eval_train_fraction,
                            eval_baseline, eval_flags, eval_out);
    } catch (const extremis::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return 3;
    } catch (const extremis::MetricError& e) {
        std::cerr << "metric error: " << e.what() << '\n';
        return 4;
    } catch (const extremis::Error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

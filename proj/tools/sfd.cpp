#include <cmath>
#include <cstdio>
#include <numbers>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sfd/checkpoint.hpp"
#include "sfd/data.hpp"
#include "sfd/metrics.hpp"
#include "sfd/process.hpp"
#include "sfd/rng.hpp"
#include "sfd/sample.hpp"
#include "sfd/svg.hpp"
#include "sfd/train.hpp"

namespace {

using namespace sfd;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct DatasetFlags {
    std::string dataset = "swiss-roll";
    int n = 20000;
    double noise_std = 0.05;
    std::uint64_t seed = 0;
};

Matrix load_dataset(const DatasetFlags& f) {
    if (f.dataset == "swiss-roll") return swiss_roll(f.n, f.noise_std, f.seed);
    if (f.dataset == "mixture") {
        Matrix centers(8, 2);
        for (int i = 0; i < 8; ++i) {
            double a = 2.0 * std::numbers::pi * i / 8.0;
            centers(i, 0) = 2.0 * std::cos(a);
            centers(i, 1) = 2.0 * std::sin(a);
        }
        return gaussian_mixture(f.n, centers, f.noise_std > 0 ? f.noise_std : 0.2, f.seed);
    }
    if (f.dataset.rfind("csv:", 0) == 0) return load_csv(f.dataset.substr(4));
    throw InvalidParameter("unknown dataset: " + f.dataset +
                           " (expected swiss-roll, mixture, or csv:<path>)");
}

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f) {
    cmd->add_option("--dataset", f.dataset, "swiss-roll | mixture | csv:<path>");
    cmd->add_option("--data-n", f.n, "generated dataset size");
    cmd->add_option("--noise-std", f.noise_std, "generator noise level");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

SubSequence build_phi(const ModelBundle& teacher, int t_prime, const std::string& phi_arg,
                      const std::string& mode, std::uint64_t seed) {
    const int T = teacher.schedule.T;
    if (!phi_arg.empty()) {
        std::string text = phi_arg;
        if (std::ifstream f(phi_arg); f) {
            std::stringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        }
        SubSequence sub;
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ','))
            if (!cell.empty()) sub.phi.push_back(std::stoi(cell));
        sub.validate(T);
        return sub;
    }
    if (t_prime <= 0) throw InvalidParameter("--tprime or --phi required");
    if (mode == "uniform") return uniform_subsequence(T, t_prime);
    if (mode == "scattered") return concentrated_subsequence(T, t_prime, 0.0, 0.05, seed);
    if (mode.rfind("concentrated:", 0) == 0) {
        double frac = 0.0, window = 0.0;
        if (std::sscanf(mode.c_str(), "concentrated:%lf,%lf", &frac, &window) != 2)
            throw InvalidParameter("expected --mode concentrated:<fraction>,<window>");
        return concentrated_subsequence(T, t_prime, frac, window, seed);
    }
    throw InvalidParameter("unknown --mode: " + mode);
}

int cmd_train_teacher(const DatasetFlags& df, int T, const std::string& schedule_name,
                      TrainConfig cfg, const std::string& out) {
    AlphaSchedule schedule = schedule_name == "linear"
                                 ? make_linear_beta_schedule(T, 1e-4, 0.02)
                                 : make_sigmoid_schedule(T);
    if (schedule_name != "linear" && schedule_name != "sigmoid")
        throw InvalidParameter("unknown --schedule: " + schedule_name);
    if (cfg.log_path.empty()) cfg.log_path = out + ".log.jsonl";
    Matrix data = load_dataset(df);
    ModelBundle teacher = train_teacher(data, schedule, cfg);
    teacher.metadata["dataset"] = df.dataset;
    save_bundle(teacher, out);
    std::cout << "teacher checkpoint written to " << out << "\n";
    return 0;
}

int cmd_distill(const std::string& teacher_path, const DatasetFlags& df, int t_prime,
                const std::string& phi_arg, const std::string& mode, TrainConfig cfg,
                const std::string& out) {
    ModelBundle teacher = load_bundle(teacher_path);
    SubSequence phi = build_phi(teacher, t_prime, phi_arg, mode, cfg.seed);
    if (cfg.log_path.empty()) cfg.log_path = out + ".log.jsonl";
    Matrix data = load_dataset(df);
    ModelBundle student = distill(teacher, phi, cfg, data);
    student.metadata["dataset"] = df.dataset;
    save_bundle(student, out);
    std::cout << "student checkpoint written to " << out << "\n";
    return 0;
}

int cmd_sample(const std::string& ckpt, int n, std::uint64_t seed, const std::string& sampler,
               const std::string& noise_scale, const std::string& out, const std::string& svg) {
    ModelBundle bundle = load_bundle(ckpt);
    Matrix samples;
    if (sampler == "ancestral") {
        samples = ancestral_sample(bundle, n, seed, noise_scale_from_name(noise_scale));
    } else if (sampler == "ddim") {
        Matrix noise(n, bundle.net.input_dim);
        for (int i = 0; i < n; ++i) {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
            for (int j = 0; j < bundle.net.input_dim; ++j) noise(i, j) = rng.normal();
        }
        samples = ddim_sample(bundle, noise);
    } else {
        throw InvalidParameter("unknown --sampler: " + sampler);
    }
    save_csv(out, samples);
    if (!svg.empty()) write_scatter_svg(svg, samples);
    std::cout << n << " samples written to " << out << "\n";
    return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::string& data_path,
                 const std::string& metrics, const std::string& against, bool consistency,
                 int n, std::uint64_t seed, const std::string& report) {
    ModelBundle bundle = load_bundle(ckpt);
    std::vector<std::pair<std::string, double>> results;

    if (!data_path.empty()) {
        Matrix data = load_csv(data_path);
        Matrix samples = ancestral_sample(bundle, n, seed);
        std::stringstream ms(metrics);
        std::string m;
        while (std::getline(ms, m, ',')) {
            if (m == "energy") {
                results.emplace_back("energy_distance", energy_distance(samples, data));
            } else if (m == "swd") {
                Matrix ref = data;
                if (ref.rows != samples.rows) {
                    // resample to equal size
                    Matrix eq(samples.rows, ref.cols);
                    Rng rng(mix_seed(seed, 0x6571));
                    for (std::size_t i = 0; i < samples.rows; ++i) {
                        const double* r = ref.row(rng.below(ref.rows));
                        std::copy(r, r + ref.cols, eq.row(i));
                    }
                    ref = std::move(eq);
                }
                results.emplace_back("sliced_wasserstein", sliced_wasserstein(samples, ref, 64, seed));
            } else if (!m.empty()) {
                throw InvalidParameter("unknown metric: " + m);
            }
        }
    }
    if (consistency) {
        if (against.empty()) throw InvalidParameter("--consistency requires --against <teacher-ckpt>");
        ModelBundle teacher = load_bundle(against);
        ConsistencyScore cs = consistency_score(teacher, bundle, n, seed);
        results.emplace_back("paired_mse", cs.paired_mse);
        results.emplace_back("random_baseline_mse", cs.random_baseline_mse);
    }

    std::ostringstream out;
    out << "{\n";
    for (const auto& [k, v] : results) out << "  \"" << k << "\": " << fmt17(v) << ",\n";
    out << "  \"ckpt\": \"" << ckpt << "\",\n";
    out << "  \"n\": " << n << ",\n";
    out << "  \"seed\": " << seed << "\n}\n";
    std::ofstream f(report, std::ios::binary);
    if (!f) throw IoError("cannot open report for writing: " + report);
    f << out.str();
    std::cout << out.str();
    return 0;
}

int cmd_interpolate(const std::string& teacher_path, const std::string& student_path, int k,
                    std::uint64_t seed, const std::string& out) {
    ModelBundle teacher = load_bundle(teacher_path);
    ModelBundle student = load_bundle(student_path);
    const int d = teacher.net.input_dim;
    Rng rng(mix_seed(seed, 0x696e74));
    Vec a(d), b(d);
    for (int j = 0; j < d; ++j) a[j] = rng.normal();
    for (int j = 0; j < d; ++j) b[j] = rng.normal();
    Matrix noises = interpolate_noises(a, b, k);
    save_csv(out + ".teacher.csv", ddim_sample(teacher, noises));
    save_csv(out + ".student.csv", ddim_sample(student, noises));
    std::cout << "interpolation written to " << out << ".{teacher,student}.csv\n";
    return 0;
}

// Invariant oracle suite against a checkpoint; one line per property.
int cmd_check(const std::string& ckpt) {
    ModelBundle bundle;
    try {
        bundle = load_bundle(ckpt);
    } catch (const Error& e) {
        std::cout << "[FAIL] checkpoint-valid: " << e.what() << "\n";
        return kExitConfig;
    }
    std::cout << "[PASS] checkpoint-valid\n";

    const int d = bundle.net.input_dim;
    const int T_prime = bundle.phi.t_prime();
    Rng rng(mix_seed(1234, 0x636866));
    bool ok = true;

    // Posterior mean identity on noiseless points.
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        int t = 1 + static_cast<int>(rng.below(T_prime));
        Vec x0(d);
        for (int j = 0; j < d; ++j) x0[j] = 2.0 * rng.normal();
        GaussianParams marg = marginal_params(bundle.schedule, bundle.phi, t, x0);
        GaussianParams post = posterior_params(bundle.schedule, bundle.phi, t, marg.mean, x0);
        double a_prev = bundle.schedule.at(bundle.phi.phi[t - 1]);
        for (int j = 0; j < d; ++j)
            worst = std::max(worst, std::abs(post.mean[j] - std::sqrt(a_prev) * x0[j]));
    }
    ok &= worst < 1e-12;
    std::cout << (worst < 1e-12 ? "[PASS]" : "[FAIL]") << " posterior-mean-identity (max err "
              << worst << ")\n";

    // Bayes density identity on a 1-D grid.
    worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        int t = 1 + static_cast<int>(rng.below(T_prime));
        double x0 = rng.normal(), xt = rng.normal(), xp = rng.normal();
        Vec vx0{x0}, vxt{xt}, vxp{xp};
        double lhs = gaussian_log_density(
                         xt, forward_step_params(bundle.schedule, bundle.phi, t, vxp).mean[0],
                         forward_step_params(bundle.schedule, bundle.phi, t, vxp).variance) +
                     gaussian_log_density(
                         xp, marginal_params(bundle.schedule, bundle.phi, t - 1, vx0).mean[0],
                         marginal_params(bundle.schedule, bundle.phi, t - 1, vx0).variance) -
                     gaussian_log_density(
                         xt, marginal_params(bundle.schedule, bundle.phi, t, vx0).mean[0],
                         marginal_params(bundle.schedule, bundle.phi, t, vx0).variance);
        GaussianParams post = posterior_params(bundle.schedule, bundle.phi, t, vxt, vx0);
        double rhs = gaussian_log_density(xp, post.mean[0], post.variance);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    ok &= worst < 1e-8;
    std::cout << (worst < 1e-8 ? "[PASS]" : "[FAIL]") << " bayes-density-identity (max err "
              << worst << ")\n";

    // Lemma-1 marginal composition, small Monte Carlo.
    {
        int t = std::min(T_prime, 3);
        Vec x0(d, 0.5);
        const int draws = 20000;
        Vec mean_acc(d, 0.0);
        double var_acc = 0.0;
        for (int s = 0; s < draws; ++s) {
            Vec x = x0;
            for (int step = 1; step <= t; ++step) {
                GaussianParams fp = forward_step_params(bundle.schedule, bundle.phi, step, x);
                double sd = std::sqrt(fp.variance);
                for (int j = 0; j < d; ++j) x[j] = fp.mean[j] + sd * rng.normal();
            }
            for (int j = 0; j < d; ++j) {
                mean_acc[j] += x[j];
                var_acc += x[j] * x[j];
            }
        }
        GaussianParams marg = marginal_params(bundle.schedule, bundle.phi, t, x0);
        double mean_sq = 0.0;
        double err = 0.0;
        for (int j = 0; j < d; ++j) {
            mean_acc[j] /= draws;
            mean_sq += mean_acc[j] * mean_acc[j] + marg.mean[j] * marg.mean[j];
            err = std::max(err, std::abs(mean_acc[j] - marg.mean[j]));
        }
        double emp_var = var_acc / (draws * d);
        double expect_var = marg.variance;
        for (int j = 0; j < d; ++j) expect_var += marg.mean[j] * marg.mean[j] / d;
        double tol = 4.0 * std::sqrt(1.0 / draws) + 4.0 * 2.0 * expect_var / std::sqrt(draws);
        bool pass = err < 4.0 * std::sqrt(marg.variance / draws) + 1e-3 &&
                    std::abs(emp_var - expect_var) < tol;
        ok &= pass;
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " marginal-composition (mean err " << err
                  << ")\n";
    }

    // Reverse variance is network independent.
    {
        struct Zero : NoisePredictor {
            int d;
            explicit Zero(int dd) : d(dd) {}
            Vec predict(const Vec&, double) const override { return Vec(d, 0.0); }
        } zero(d);
        int t = std::max(1, T_prime / 2);
        Vec x(d, 0.3);
        double v1 = reverse_params(bundle.net, bundle.schedule, bundle.phi, t, x).variance;
        double v2 = reverse_params(zero, bundle.schedule, bundle.phi, t, x).variance;
        bool pass = v1 == v2;
        ok &= pass;
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " reverse-variance-fixed\n";
    }

    return ok ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DDPM teacher training and single-fold distillation toolkit"};
    app.require_subcommand(1);

    // train-teacher
    auto* train_cmd = app.add_subcommand("train-teacher", "Train a DDPM teacher");
    DatasetFlags train_df;
    int train_T = 500;
    std::string train_schedule = "sigmoid";
    TrainConfig train_cfg;
    std::string train_out, train_loss = "l2", train_weighting = "unit";
    train_cfg.steps = 40000;
    add_dataset_flags(train_cmd, train_df);
    train_cmd->add_option("--T", train_T, "teacher step count");
    train_cmd->add_option("--schedule", train_schedule, "sigmoid | linear");
    train_cmd->add_option("--steps", train_cfg.steps, "training steps");
    train_cmd->add_option("--batch", train_cfg.batch_size, "batch size");
    train_cmd->add_option("--lr", train_cfg.lr, "learning rate");
    train_cmd->add_option("--loss", train_loss, "l1 | l2");
    train_cmd->add_option("--weighting", train_weighting, "unit | gamma");
    train_cmd->add_option("--hidden", train_cfg.hidden_widths, "hidden layer widths");
    train_cmd->add_option("--seed", train_cfg.seed, "RNG seed");
    train_cmd->add_option("--log", train_cfg.log_path, "training log path (JSONL)");
    train_cmd->add_option("--out", train_out, "checkpoint output path")->required();

    // distill
    auto* distill_cmd = app.add_subcommand("distill", "Distill a teacher into a student");
    DatasetFlags distill_df;
    std::string distill_teacher, distill_phi, distill_mode = "uniform", distill_out;
    std::string distill_loss = "l1", distill_weighting = "unit";
    int distill_tprime = 0;
    TrainConfig distill_cfg;
    distill_cfg.steps = 20000;
    distill_cfg.loss_norm = LossNorm::L1;
    add_dataset_flags(distill_cmd, distill_df);
    distill_cmd->add_option("--teacher", distill_teacher, "teacher checkpoint")->required();
    distill_cmd->add_option("--tprime", distill_tprime, "student step count");
    distill_cmd->add_option("--phi", distill_phi, "explicit sub-sequence (comma list or file)");
    distill_cmd->add_option("--mode", distill_mode,
                            "uniform | concentrated:<frac>,<window> | scattered");
    distill_cmd->add_option("--steps", distill_cfg.steps, "training steps");
    distill_cmd->add_option("--batch", distill_cfg.batch_size, "batch size");
    distill_cmd->add_option("--lr", distill_cfg.lr, "learning rate");
    distill_cmd->add_option("--loss", distill_loss, "l1 | l2");
    distill_cmd->add_option("--weighting", distill_weighting, "unit | gamma");
    distill_cmd->add_option("--hidden", distill_cfg.hidden_widths, "hidden layer widths");
    distill_cmd->add_flag("--warm-start", distill_cfg.warm_start_from_teacher,
                          "initialize the student from the teacher weights");
    distill_cmd->add_option("--seed", distill_cfg.seed, "RNG seed");
    distill_cmd->add_option("--log", distill_cfg.log_path, "training log path (JSONL)");
    distill_cmd->add_option("--out", distill_out, "checkpoint output path")->required();

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Sample from a checkpoint");
    std::string sample_ckpt, sample_out, sample_svg, sample_sampler = "ancestral",
                sample_noise_scale = "stddev";
    int sample_n = 2000;
    std::uint64_t sample_seed = 0;
    sample_cmd->add_option("--ckpt", sample_ckpt, "checkpoint path")->required();
    sample_cmd->add_option("--n", sample_n, "sample count");
    sample_cmd->add_option("--seed", sample_seed, "RNG seed");
    sample_cmd->add_option("--sampler", sample_sampler, "ancestral | ddim");
    sample_cmd->add_option("--noise-scale", sample_noise_scale, "stddev | raw");
    sample_cmd->add_option("--out", sample_out, "output CSV")->required();
    sample_cmd->add_option("--svg", sample_svg, "optional scatter plot");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Compute quality/consistency metrics");
    std::string eval_ckpt, eval_data, eval_metrics = "energy,swd", eval_against, eval_report;
    bool eval_consistency = false;
    int eval_n = 2000;
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--data", eval_data, "reference data CSV");
    eval_cmd->add_option("--metrics", eval_metrics, "comma list of energy, swd");
    eval_cmd->add_option("--against", eval_against, "teacher checkpoint for --consistency");
    eval_cmd->add_flag("--consistency", eval_consistency, "paired DDIM consistency score");
    eval_cmd->add_option("--n", eval_n, "sample / noise count");
    eval_cmd->add_option("--seed", eval_seed, "RNG seed");
    eval_cmd->add_option("--report", eval_report, "JSON report path")->required();

    // interpolate
    auto* interp_cmd = app.add_subcommand("interpolate", "Noise interpolation through both models");
    std::string interp_teacher, interp_student, interp_out;
    int interp_k = 8;
    std::uint64_t interp_seed = 0;
    interp_cmd->add_option("--teacher", interp_teacher, "teacher checkpoint")->required();
    interp_cmd->add_option("--student", interp_student, "student checkpoint")->required();
    interp_cmd->add_option("--k", interp_k, "interpolation points");
    interp_cmd->add_option("--seed", interp_seed, "RNG seed");
    interp_cmd->add_option("--out", interp_out, "output prefix")->required();

    // check
    auto* check_cmd = app.add_subcommand("check", "Run the invariant oracle suite on a checkpoint");
    std::string check_ckpt;
    check_cmd->add_option("--ckpt", check_ckpt, "checkpoint path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (train_cmd->parsed()) {
            train_cfg.loss_norm = loss_norm_from_name(train_loss);
            train_cfg.weighting = weighting_from_name(train_weighting);
            train_df.seed = train_cfg.seed;
            return cmd_train_teacher(train_df, train_T, train_schedule, train_cfg, train_out);
        }
        if (distill_cmd->parsed()) {
            distill_cfg.loss_norm = loss_norm_from_name(distill_loss);
            distill_cfg.weighting = weighting_from_name(distill_weighting);
            distill_df.seed = distill_cfg.seed;
            return cmd_distill(distill_teacher, distill_df, distill_tprime, distill_phi,
                               distill_mode, distill_cfg, distill_out);
        }
        if (sample_cmd->parsed())
            return cmd_sample(sample_ckpt, sample_n, sample_seed, sample_sampler,
                              sample_noise_scale, sample_out, sample_svg);
        if (eval_cmd->parsed())
            return cmd_evaluate(eval_ckpt, eval_data, eval_metrics, eval_against,
                                eval_consistency, eval_n, eval_seed, eval_report);
        if (interp_cmd->parsed())
            return cmd_interpolate(interp_teacher, interp_student, interp_k, interp_seed,
                                   interp_out);
        if (check_cmd->parsed()) return cmd_check(check_ckpt);
    } catch (const NonFiniteLoss& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

#include "sfd/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "sfd/rng.hpp"

namespace sfd {

std::string weighting_name(Weighting w) { return w == Weighting::Unit ? "unit" : "gamma"; }

Weighting weighting_from_name(const std::string& name) {
    if (name == "unit") return Weighting::Unit;
    if (name == "gamma") return Weighting::Gamma;
    throw InvalidParameter("unknown weighting: " + name);
}

std::string bundle_kind_name(BundleKind k) { return k == BundleKind::Teacher ? "teacher" : "student"; }

BundleKind bundle_kind_from_name(const std::string& name) {
    if (name == "teacher") return BundleKind::Teacher;
    if (name == "student") return BundleKind::Student;
    throw SchemaViolation("unknown bundle kind: " + name);
}

void TrainConfig::validate() const {
    if (steps < 0) throw InvalidParameter("steps must be >= 0");
    if (batch_size < 1) throw InvalidParameter("batch_size must be positive");
    if (!(lr > 0.0)) throw InvalidParameter("lr must be positive");
    if (log_every < 1) throw InvalidParameter("log_every must be positive");
    for (int w : hidden_widths)
        if (w < 1) throw InvalidParameter("hidden widths must be positive");
}

void ModelBundle::validate() const {
    schedule.validate();
    phi.validate(schedule.T);
    net.validate();
}

double gamma_weight(const AlphaSchedule& schedule, const SubSequence& phi, int t) {
    const double a_t = schedule.at(phi.phi[t]);
    const double a_prev = schedule.at(phi.phi[t - 1]);
    // the first reverse step has zero posterior variance, so the KL-derived
    // weight is undefined there; treat it as the unit-weight decoder term
    if (t == 1) return 1.0;
    const double sigma = (1.0 - a_prev) * (a_prev - a_t) / ((1.0 - a_t) * a_prev);
    return (a_prev - a_t) * (a_prev - a_t) /
           (2.0 * sigma * sigma * a_t * a_prev * (1.0 - a_t));
}

namespace {

struct TrainLogger {
    std::ofstream out;
    double ema = 0.0;
    bool ema_init = false;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit TrainLogger(const std::string& path) {
        if (!path.empty()) {
            out.open(path);
            if (!out) throw IoError("cannot open training log: " + path);
        }
    }

    void record(long step, double loss, long log_every) {
        if (!ema_init) {
            ema = loss;
            ema_init = true;
        } else {
            ema = 0.99 * ema + 0.01 * loss;
        }
        if (out && (step % log_every == 0 || step == 1)) {
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
            char buf[160];
            std::snprintf(buf, sizeof(buf), "{\"step\": %ld, \"loss_ema\": %.17g, \"wall_ms\": %lld}\n",
                          step, ema, static_cast<long long>(ms));
            out << buf;
        }
    }
};

struct Batch {
    Matrix x;        // noised inputs z
    Vec t_norm;      // time fed to the trained net
    Matrix targets;  // regression targets
    Vec weights;     // per-sample loss weights
};

// Draw one minibatch for teacher training or distillation. For distillation
// the target is the teacher's prediction at the matched teacher step.
Batch draw_batch(const Matrix& data, const AlphaSchedule& schedule, const SubSequence& phi,
                 const TrainConfig& config, Rng& rng, const EpsilonNet* teacher_net) {
    const std::size_t n = data.rows;
    const std::size_t d = data.cols;
    const int T_prime = phi.t_prime();
    const int T = schedule.T;

    Batch b;
    b.x = Matrix(config.batch_size, d);
    b.targets = Matrix(config.batch_size, d);
    b.t_norm.resize(config.batch_size);
    b.weights.assign(config.batch_size, 1.0);

    for (int i = 0; i < config.batch_size; ++i) {
        const double* x0 = data.row(rng.below(n));
        const int t = 1 + static_cast<int>(rng.below(T_prime));
        const double a_t = schedule.at(phi.phi[t]);
        const double signal = std::sqrt(a_t);
        const double noise = std::sqrt(1.0 - a_t);
        Vec z(d), eps(d);
        for (std::size_t j = 0; j < d; ++j) {
            eps[j] = rng.normal();
            z[j] = signal * x0[j] + noise * eps[j];
        }
        b.t_norm[i] = static_cast<double>(t) / T_prime;
        if (teacher_net) {
            Vec eps_hat = teacher_net->predict(z, static_cast<double>(phi.phi[t]) / T);
            std::copy(eps_hat.begin(), eps_hat.end(), b.targets.row(i));
        } else {
            std::copy(eps.begin(), eps.end(), b.targets.row(i));
        }
        std::copy(z.begin(), z.end(), b.x.row(i));
        if (config.weighting == Weighting::Gamma) b.weights[i] = gamma_weight(schedule, phi, t);
    }
    return b;
}

void run_training(EpsilonNet& net, const Matrix& data, const AlphaSchedule& schedule,
                  const SubSequence& phi, const TrainConfig& config,
                  const EpsilonNet* teacher_net, std::map<std::string, std::string>& metadata) {
    Rng rng(mix_seed(config.seed, 0x7472));
    AdamState adam = make_adam_state(net, config.lr);
    TrainLogger logger(config.log_path);

    for (long step = 1; step <= config.steps; ++step) {
        Batch b = draw_batch(data, schedule, phi, config, rng, teacher_net);
        LossResult res;
        try {
            res = loss_and_grads(net, b.x, b.t_norm, b.targets, config.loss_norm,
                                 config.weighting == Weighting::Gamma ? &b.weights : nullptr);
        } catch (const NonFiniteLoss&) {
            throw NonFiniteLoss("non-finite loss at training step " + std::to_string(step));
        }
        adam_step(net, adam, res.grads);
        logger.record(step, res.loss, config.log_every);
    }
    if (logger.ema_init) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.17g", logger.ema);
        metadata["final_loss_ema"] = buf;
    }
    metadata["steps"] = std::to_string(config.steps);
    metadata["batch_size"] = std::to_string(config.batch_size);
    metadata["loss_norm"] = loss_norm_name(config.loss_norm);
    metadata["seed"] = std::to_string(config.seed);
}

}  // namespace

ModelBundle train_teacher(const Matrix& data, const AlphaSchedule& schedule,
                          const TrainConfig& config) {
    config.validate();
    schedule.validate();
    if (data.rows < static_cast<std::size_t>(config.batch_size))
        throw InvalidParameter("dataset smaller than batch size");
    if (!all_finite(data)) throw InvalidParameter("dataset contains non-finite values");

    ModelBundle bundle;
    bundle.kind = BundleKind::Teacher;
    bundle.schedule = schedule;
    bundle.phi = identity_subsequence(schedule.T);
    bundle.net = make_net(static_cast<int>(data.cols), config.hidden_widths, config.seed);
    run_training(bundle.net, data, bundle.schedule, bundle.phi, config, nullptr, bundle.metadata);
    return bundle;
}

ModelBundle distill(const ModelBundle& teacher, const SubSequence& phi, const TrainConfig& config,
                    const Matrix& data) {
    config.validate();
    if (teacher.kind != BundleKind::Teacher) throw InvalidParameter("distill requires a teacher bundle");
    teacher.validate();
    phi.validate(teacher.schedule.T);
    if (data.cols != static_cast<std::size_t>(teacher.net.input_dim))
        throw DimensionMismatch("dataset dimension does not match the teacher network");
    if (data.rows < static_cast<std::size_t>(config.batch_size))
        throw InvalidParameter("dataset smaller than batch size");

    ModelBundle student;
    student.kind = BundleKind::Student;
    student.schedule = teacher.schedule;
    student.phi = phi;
    if (config.warm_start_from_teacher)
        student.net = teacher.net;
    else
        student.net = make_net(teacher.net.input_dim, config.hidden_widths, config.seed,
                               teacher.net.time_embed_dim);
    run_training(student.net, data, student.schedule, student.phi, config, &teacher.net,
                 student.metadata);
    student.metadata["t_prime"] = std::to_string(phi.t_prime());
    return student;
}

double scratch_student_loss_step(const ModelBundle& student, const Matrix& data,
                                 const TrainConfig& config) {
    config.validate();
    student.validate();
    Rng rng(mix_seed(config.seed, 0x7472));
    Batch b = draw_batch(data, student.schedule, student.phi, config, rng, nullptr);
    LossResult res = loss_and_grads(student.net, b.x, b.t_norm, b.targets, config.loss_norm,
                                    config.weighting == Weighting::Gamma ? &b.weights : nullptr);
    return res.loss;
}

double distill_loss_eval(const ModelBundle& teacher, const ModelBundle& student,
                         const Matrix& data, const TrainConfig& config,
                         std::uint64_t draw_index) {
    Rng rng(mix_seed(config.seed, 0x7472 + draw_index));
    Batch b = draw_batch(data, student.schedule, student.phi, config, rng, &teacher.net);
    LossResult res = loss_and_grads(student.net, b.x, b.t_norm, b.targets, config.loss_norm,
                                    config.weighting == Weighting::Gamma ? &b.weights : nullptr);
    return res.loss;
}

}  // namespace sfd

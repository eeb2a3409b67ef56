#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sfd/net.hpp"
#include "sfd/process.hpp"
#include "sfd/schedule.hpp"

namespace sfd {

enum class Weighting { Unit, Gamma };

std::string weighting_name(Weighting w);
Weighting weighting_from_name(const std::string& name);

struct TrainConfig {
    long steps = 0;
    int batch_size = 256;
    double lr = 2e-4;
    LossNorm loss_norm = LossNorm::L2;
    Weighting weighting = Weighting::Unit;
    std::uint64_t seed = 0;
    long log_every = 200;
    std::string log_path;  // JSONL training log; empty disables
    std::vector<int> hidden_widths = {128, 128, 128};
    bool warm_start_from_teacher = false;  // distill only

    void validate() const;
};

enum class BundleKind { Teacher, Student };

std::string bundle_kind_name(BundleKind k);
BundleKind bundle_kind_from_name(const std::string& name);

// Persisted unit of (schedule, sub-sequence, network, metadata).
struct ModelBundle {
    BundleKind kind = BundleKind::Teacher;
    AlphaSchedule schedule;
    SubSequence phi;  // identity for teacher
    EpsilonNet net;
    std::map<std::string, std::string> metadata;

    void validate() const;
};

// gamma'_t weight for a student step: (a_prev-a_t)^2 / (2 sigma'^2 a_t a_prev (1-a_t))
// with sigma' the posterior variance. Teacher weight is the identity-phi case.
double gamma_weight(const AlphaSchedule& schedule, const SubSequence& phi, int t);

// Standard DDPM epsilon-regression training; returns a teacher bundle with
// identity phi.
ModelBundle train_teacher(const Matrix& data, const AlphaSchedule& schedule,
                          const TrainConfig& config);

// Single-fold distillation: the student regresses onto the frozen teacher's
// noise prediction at the matched teacher step phi_t.
ModelBundle distill(const ModelBundle& teacher, const SubSequence& phi, const TrainConfig& config,
                    const Matrix& data);

// One evaluation of the from-scratch student loss (regression onto the true
// noise rather than the teacher's prediction) on a batch drawn from data.
double scratch_student_loss_step(const ModelBundle& student, const Matrix& data,
                                 const TrainConfig& config);

// One evaluation of the distillation loss for a student/teacher pair without
// updating anything; used by the fixed-point tests.
double distill_loss_eval(const ModelBundle& teacher, const ModelBundle& student,
                         const Matrix& data, const TrainConfig& config, std::uint64_t draw_index);

}  // namespace sfd

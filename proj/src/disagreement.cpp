#include "adgkt/disagreement.hpp"

#include <algorithm>
#include <cmath>

#include "adgkt/error.hpp"
#include "adgkt/kernels.hpp"
#include "adgkt/loss.hpp"

namespace adgkt {

namespace {

void check_batch(const FeatureBatch& x, const char* what) {
    if (x.rows() < 2) {
        throw SampleCountError(std::string(what) + ": need at least 2 samples, got " + std::to_string(x.rows()));
    }
}

void check_pair(const FeatureBatch& x, const FeatureBatch& y, const char* what) {
    check_batch(x, what);
    check_batch(y, what);
    if (x.rows() != y.rows()) {
        throw SampleCountError(std::string(what) + ": sample counts differ (" + std::to_string(x.rows()) + " vs " +
                               std::to_string(y.rows()) + ")");
    }
}

double mean_product(const Matrix& a, const Matrix& b) {
    const auto av = a.values();
    const auto bv = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return s / static_cast<double>(av.size());
}

void check_temperature(double t) {
    if (!(t > 0.0)) throw ConfigError("kl_divergence: temperature must be > 0");
}

// Gradient w.r.t. the rows of x of sum_ij coeff_ij * dist_ij, for symmetric coeff.
Matrix distance_chain(const FeatureBatch& x, const Matrix& dist, const Matrix& coeff) {
    const std::size_t n = x.rows();
    Matrix grad(n, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
        auto gi = grad.row(i);
        auto xi = x.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double w = 2.0 * coeff(i, j) / dist(i, j);
            auto xj = x.row(j);
            for (std::size_t k = 0; k < gi.size(); ++k) gi[k] += w * (xi[k] - xj[k]);
        }
    }
    return grad;
}

}  // namespace

void DistillConfig::validate() const {
    if (!(temp_agree > 0.0)) throw ConfigError("temp_agree must be > 0");
    if (!(temp_disagree > 0.0)) throw ConfigError("temp_disagree must be > 0");
}

Matrix pairwise_distances(const FeatureBatch& x) {
    check_batch(x, "pairwise_distances");
    return kernels::pairwise_distances(x, 0.0);
}

Matrix double_center(const Matrix& d) { return kernels::double_center(d); }

double distance_correlation(const FeatureBatch& x, const FeatureBatch& y) {
    check_pair(x, y, "distance_correlation");
    const Matrix a = kernels::double_center(kernels::pairwise_distances(x, 0.0));
    const Matrix b = kernels::double_center(kernels::pairwise_distances(y, 0.0));
    const double vxx = mean_product(a, a);
    const double vyy = mean_product(b, b);
    if (std::sqrt(vxx) < kMinDistanceVariance || std::sqrt(vyy) < kMinDistanceVariance) return 0.0;
    const double vxy = std::max(mean_product(a, b), 0.0);
    return std::clamp(std::sqrt(vxy / std::sqrt(vxx * vyy)), 0.0, 1.0);
}

DirLoss dir_loss(const FeatureBatch& shared, const FeatureBatch& priv) {
    check_pair(shared, priv, "dir_loss");
    const std::size_t n = shared.rows();
    const Matrix dx = kernels::pairwise_distances(shared, kDistanceSmoothing);
    const Matrix dy = kernels::pairwise_distances(priv, kDistanceSmoothing);
    const Matrix a = kernels::double_center(dx);
    const Matrix b = kernels::double_center(dy);
    const double vxx = mean_product(a, a);
    const double vyy = mean_product(b, b);
    const double vxy = mean_product(a, b);

    DirLoss out{0.0, Matrix(n, shared.cols()), Matrix(n, priv.cols())};
    if (std::sqrt(vxx) < kMinDistanceVariance || std::sqrt(vyy) < kMinDistanceVariance || vxy <= 0.0) return out;

    const double root = std::sqrt(vxx * vyy);
    out.value = std::sqrt(vxy / root);

    // R = sqrt(Vxy / sqrt(Vxx Vyy)). Since double centering is an orthogonal
    // projection, dVxy/da = B/n^2 and dVxx/da = 2A/n^2, giving
    //   dR/da = (B - (Vxy/Vxx) A) / (2 R n^2 sqrt(Vxx Vyy)).
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    const double common = 1.0 / (2.0 * out.value * nn * root);
    Matrix coeff_x = (b - a * (vxy / vxx)) * common;
    Matrix coeff_y = (a - b * (vxy / vyy)) * common;
    out.grad_shared = distance_chain(shared, dx, coeff_x);
    out.grad_private = distance_chain(priv, dy, coeff_y);
    return out;
}

KlGrad kl_divergence_grad(std::span<const double> p_logits, std::span<const double> q_logits, double temperature,
                          bool scale_by_t2) {
    check_temperature(temperature);
    if (p_logits.size() != q_logits.size()) throw DimensionError("kl_divergence: logit lengths differ");
    if (p_logits.size() < 2) throw DimensionError("kl_divergence: need at least 2 classes");

    const Matrix lp = log_softmax(Matrix::row_vector(p_logits), temperature);
    const Matrix lq = log_softmax(Matrix::row_vector(q_logits), temperature);
    const std::size_t c = p_logits.size();

    double kl = 0.0;
    std::vector<double> prob_p(c), prob_q(c);
    for (std::size_t k = 0; k < c; ++k) {
        prob_p[k] = std::exp(lp(0, k));
        prob_q[k] = std::exp(lq(0, k));
        kl += prob_p[k] * (lp(0, k) - lq(0, k));
    }
    kl = std::max(kl, 0.0);

    const double scale = scale_by_t2 ? temperature * temperature : 1.0;
    KlGrad out{scale * kl, std::vector<double>(c), std::vector<double>(c)};
    for (std::size_t k = 0; k < c; ++k) {
        out.grad_p[k] = scale / temperature * prob_p[k] * (lp(0, k) - lq(0, k) - kl);
        out.grad_q[k] = scale / temperature * (prob_q[k] - prob_p[k]);
    }
    return out;
}

double kl_divergence(std::span<const double> p_logits, std::span<const double> q_logits, double temperature,
                     bool scale_by_t2) {
    return kl_divergence_grad(p_logits, q_logits, temperature, scale_by_t2).value;
}

DistillLoss symmetric_kl(const Matrix& student_logits, const Matrix& teacher_logits, double temperature,
                         bool scale_by_t2) {
    require_same_shape(student_logits, teacher_logits, "symmetric_kl");
    if (student_logits.rows() == 0) throw DataError("symmetric_kl: empty batch");
    const double inv_n = 1.0 / static_cast<double>(student_logits.rows());
    DistillLoss out{0.0, Matrix(student_logits.rows(), student_logits.cols())};
    for (std::size_t i = 0; i < student_logits.rows(); ++i) {
        const auto s = student_logits.row(i);
        const auto t = teacher_logits.row(i);
        const KlGrad forward = kl_divergence_grad(s, t, temperature, scale_by_t2);
        const KlGrad reverse = kl_divergence_grad(t, s, temperature, scale_by_t2);
        out.value += forward.value + reverse.value;
        auto g = out.grad_student.row(i);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = (forward.grad_p[k] + reverse.grad_q[k]) * inv_n;
    }
    out.value *= inv_n;
    return out;
}

DistillLoss ensemble_loss_agree(const Matrix& ens_logits, const Matrix& agree_logits, const DistillConfig& cfg) {
    cfg.validate();
    return symmetric_kl(ens_logits, agree_logits, cfg.temp_agree, cfg.scale_by_t2);
}

DistillLoss ensemble_loss_disagree(const Matrix& ens_logits, const Matrix& disagree_logits,
                                   const DistillConfig& cfg) {
    cfg.validate();
    return symmetric_kl(ens_logits, disagree_logits, cfg.temp_disagree, cfg.scale_by_t2);
}

}  // namespace adgkt

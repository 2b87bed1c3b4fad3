#include "vapal/vat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vapal {

void VatConfig::validate() const {
    if (power_iters < 1) {
        throw std::invalid_argument("VatConfig: power_iters must be >= 1");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("VatConfig: epsilon must be > 0");
    }
    if (!(xi > 0.0) || !std::isfinite(xi)) {
        throw std::invalid_argument("VatConfig: xi must be > 0");
    }
}

std::uint64_t example_seed(const VatConfig& vcfg, std::uint64_t example_id) {
    return mix_seed(vcfg.seed, example_id);
}

namespace {

Vec shifted(std::span<const double> h, std::span<const double> r) {
    if (h.size() != r.size()) {
        throw std::invalid_argument("perturbation dimension mismatch");
    }
    Vec x(h.begin(), h.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += r[i];
    }
    return x;
}

Vec scaled(std::span<const double> v, double s) {
    Vec out(v.begin(), v.end());
    for (double& x : out) {
        x *= s;
    }
    return out;
}

}  // namespace

Perturbation compute_vadv(const ModelParams& params, std::span<const double> h, const VatConfig& vcfg, Rng& rng) {
    vcfg.validate();
    if (h.size() != params.input_dim()) {
        throw std::invalid_argument("compute_vadv: feature dimension mismatch");
    }
    const ProbDist p_ref = predict_proba(params, h);

    Vec d = gaussian_vector(h.size(), rng);
    while (l2_norm(d) == 0.0) {
        d = gaussian_vector(h.size(), rng);
    }
    d = l2_normalize(d);

    Perturbation out;
    for (std::size_t it = 0; it < vcfg.power_iters; ++it) {
        const Vec g = kl_input_grad(params, h, scaled(d, vcfg.xi), p_ref);
        const double gn = l2_norm(g);
        if (gn > 0.0 && std::isfinite(gn)) {
            d = l2_normalize(g);
        } else if (it == 0) {
            out.degenerate = true;
            break;
        }
    }
    // power iteration fixes the direction only up to sign
    Vec plus = scaled(d, vcfg.epsilon);
    Vec minus = scaled(d, -vcfg.epsilon);
    const double kl_plus = kl_divergence(p_ref, predict_proba(params, shifted(h, plus)));
    const double kl_minus = kl_divergence(p_ref, predict_proba(params, shifted(h, minus)));
    if (kl_minus > kl_plus) {
        out.r = std::move(minus);
        out.kl_at_r = kl_minus;
    } else {
        out.r = std::move(plus);
        out.kl_at_r = kl_plus;
    }
    return out;
}

Perturbation compute_vadv(const ModelParams& params, std::span<const double> h, const VatConfig& vcfg,
                          std::uint64_t example_id) {
    Rng rng(example_seed(vcfg, example_id));
    return compute_vadv(params, h, vcfg, rng);
}

double perturbation_kl(const ModelParams& params, std::span<const double> h, std::span<const double> r) {
    return kl_divergence(predict_proba(params, h), predict_proba(params, shifted(h, r)));
}

double lds_score(const ModelParams& params, std::span<const double> h, std::span<const double> r) {
    return -perturbation_kl(params, h, r);
}

double ldr_score(const ModelParams& params, std::span<const double> h, std::span<const double> r) {
    return perturbation_kl(params, h, r);
}

Vec kl_contribution_vector(const ModelParams& params, std::span<const double> h, std::span<const double> r) {
    const ProbDist p = predict_proba(params, h);
    const ProbDist q = predict_proba(params, shifted(h, r));
    Vec v(p.size(), 0.0);
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] > 0.0) {
            v[c] = p[c] * (std::log(p[c]) - std::log(std::max(q[c], kProbFloor)));
        }
    }
    return v;
}

}  // namespace vapal

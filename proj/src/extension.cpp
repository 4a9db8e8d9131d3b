#include "boolution/extension.hpp"

#include <algorithm>
#include <cmath>

#include "boolution/kernels.hpp"

namespace boolution {
namespace {

// ---------------------------------------------------------------------------
// Mask-enumeration backend.  Tables longer than 2^16 are processed in blocks
// over the high loci: the low-bit weight table is shared by every block and
// the high-bit weight is a per-block scalar.
// ---------------------------------------------------------------------------

struct Neumaier {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

// A bucket whose total weight is exactly zero carries no mass, so the
// extension collapses to the other landscape value exactly.  This keeps
// constant functions (and vertex points) free of the ~1e-16 wobble of a
// weight table that only sums to 1 up to rounding.
double combine_buckets(double v_sat, double v_unsat, double w_sat,
                       double w_unsat) {
    if (w_unsat == 0.0) return v_sat;
    if (w_sat == 0.0) return v_unsat;
    return v_sat * w_sat + v_unsat * w_unsat;
}

struct Workspace {
    std::vector<double> wlow;
    std::vector<std::vector<double>> signed_low;
    std::vector<double> phi;
};

Workspace& workspace() {
    thread_local Workspace w;
    return w;
}

int low_bit_count(int n) { return std::min(n, 16); }

void build_low_weights(const ProductPoint& mu, int nlow,
                       std::vector<double>& buf) {
    buf.resize(std::size_t(1) << nlow);
    buf[0] = 1.0;
    for (int i = 0; i < nlow; ++i)
        kern::weight_extend(buf.data(), std::size_t(1) << i, mu.p_plus(i),
                            mu.p_minus(i));
}

double high_weight(const ProductPoint& mu, int nlow, int n,
                   std::uint32_t block) {
    double w = 1.0;
    for (int i = nlow; i < n; ++i)
        w *= ((block >> (i - nlow)) & 1u) ? mu.p_plus(i) : mu.p_minus(i);
    return w;
}

struct BucketSums {
    double w_sat = 0.0;
    double w_unsat = 0.0;
    std::vector<double> sx_sat;    // per locus: sum of sign(x_i) * weight, satisfied
    std::vector<double> sx_unsat;  // same over unsatisfied genotypes
};

BucketSums enum_bucket_sums(const BooleanFitnessFunction& f,
                            const ProductPoint& mu, bool want_moments) {
    const int n = f.n();
    const int nlow = low_bit_count(n);
    const std::size_t block_len = std::size_t(1) << nlow;
    const std::uint32_t nblocks = std::uint32_t(1) << (n - nlow);
    const SatTable& sat = f.sat_table();

    Workspace& ws = workspace();
    build_low_weights(mu, nlow, ws.wlow);
    if (want_moments) {
        ws.signed_low.resize(static_cast<std::size_t>(nlow));
        for (int i = 0; i < nlow; ++i) {
            ws.signed_low[static_cast<std::size_t>(i)] = ws.wlow;
            kern::pattern_scale(ws.signed_low[static_cast<std::size_t>(i)].data(),
                                block_len, std::size_t(1) << i, 1.0, -1.0);
        }
    }

    Neumaier w_sat, w_unsat;
    std::vector<Neumaier> sx_sat, sx_unsat;
    if (want_moments) {
        sx_sat.resize(static_cast<std::size_t>(n));
        sx_unsat.resize(static_cast<std::size_t>(n));
    }

    for (std::uint32_t b = 0; b < nblocks; ++b) {
        const double wh = high_weight(mu, nlow, n, b);
        if (wh == 0.0) continue;
        const std::uint64_t* bits =
            sat.words.data() + (std::size_t(b) * block_len) / 64;
        const auto base = kern::masked_sums(ws.wlow.data(), bits, block_len);
        w_sat.add(wh * base.in_sum);
        w_unsat.add(wh * base.out_sum);
        if (!want_moments) continue;
        for (int i = 0; i < nlow; ++i) {
            const auto s = kern::masked_sums(
                ws.signed_low[static_cast<std::size_t>(i)].data(), bits,
                block_len);
            sx_sat[static_cast<std::size_t>(i)].add(wh * s.in_sum);
            sx_unsat[static_cast<std::size_t>(i)].add(wh * s.out_sum);
        }
        for (int i = nlow; i < n; ++i) {
            const double sign = ((b >> (i - nlow)) & 1u) ? 1.0 : -1.0;
            sx_sat[static_cast<std::size_t>(i)].add(sign * wh * base.in_sum);
            sx_unsat[static_cast<std::size_t>(i)].add(sign * wh *
                                                      base.out_sum);
        }
    }

    BucketSums out;
    out.w_sat = w_sat.value();
    out.w_unsat = w_unsat.value();
    if (want_moments) {
        out.sx_sat.resize(static_cast<std::size_t>(n));
        out.sx_unsat.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            out.sx_sat[static_cast<std::size_t>(i)] =
                sx_sat[static_cast<std::size_t>(i)].value();
            out.sx_unsat[static_cast<std::size_t>(i)] =
                sx_unsat[static_cast<std::size_t>(i)].value();
        }
    }
    return out;
}

// E_mu[f * phi_S] by enumeration; degeneracy already checked by the caller.
double enum_coefficient(const BooleanFitnessFunction& f,
                        const std::vector<int>& subset,
                        const ProductPoint& mu) {
    const int n = f.n();
    const int nlow = low_bit_count(n);
    const std::size_t block_len = std::size_t(1) << nlow;
    const std::uint32_t nblocks = std::uint32_t(1) << (n - nlow);
    const SatTable& sat = f.sat_table();

    Workspace& ws = workspace();
    build_low_weights(mu, nlow, ws.wlow);
    ws.phi = ws.wlow;
    for (int i : subset) {
        if (i < nlow) {
            const double s = mu.sigma(i);
            kern::pattern_scale(ws.phi.data(), block_len, std::size_t(1) << i,
                                (1.0 - mu[i]) / s, (-1.0 - mu[i]) / s);
        }
    }

    Neumaier acc_sat, acc_unsat;
    for (std::uint32_t b = 0; b < nblocks; ++b) {
        double wh = high_weight(mu, nlow, n, b);
        if (wh == 0.0) continue;
        for (int i : subset) {
            if (i >= nlow) {
                const double s = mu.sigma(i);
                wh *= ((b >> (i - nlow)) & 1u) ? (1.0 - mu[i]) / s
                                               : (-1.0 - mu[i]) / s;
            }
        }
        const std::uint64_t* bits =
            sat.words.data() + (std::size_t(b) * block_len) / 64;
        const auto s = kern::masked_sums(ws.phi.data(), bits, block_len);
        acc_sat.add(wh * s.in_sum);
        acc_unsat.add(wh * s.out_sum);
    }
    return f.landscape().satisfied_value() * acc_sat.value() +
           f.landscape().unsatisfied_value() * acc_unsat.value();
}

// ---------------------------------------------------------------------------
// Locus-count dynamic program (Poisson binomial) for Threshold / SumEqualsK.
// ---------------------------------------------------------------------------

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    }
    return out;
}

// prefix[i] = count distribution over loci [0, i)
std::vector<std::vector<double>> prefix_counts(const std::vector<double>& p) {
    std::vector<std::vector<double>> pre(p.size() + 1);
    pre[0] = {1.0};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& prev = pre[i];
        std::vector<double> next(prev.size() + 1, 0.0);
        for (std::size_t j = 0; j < prev.size(); ++j) {
            next[j] += prev[j] * (1.0 - p[i]);
            next[j + 1] += prev[j] * p[i];
        }
        pre[i + 1] = std::move(next);
    }
    return pre;
}

std::vector<std::vector<double>> suffix_counts(const std::vector<double>& p) {
    std::vector<std::vector<double>> suf(p.size() + 1);
    suf[p.size()] = {1.0};
    for (std::size_t i = p.size(); i-- > 0;) {
        const auto& prev = suf[i + 1];
        std::vector<double> next(prev.size() + 1, 0.0);
        for (std::size_t j = 0; j < prev.size(); ++j) {
            next[j] += prev[j] * (1.0 - p[i]);
            next[j + 1] += prev[j] * p[i];
        }
        suf[i] = std::move(next);
    }
    return suf;
}

std::vector<double> plus_probabilities(const ProductPoint& mu) {
    std::vector<double> p(static_cast<std::size_t>(mu.size()));
    for (int i = 0; i < mu.size(); ++i)
        p[static_cast<std::size_t>(i)] = mu.p_plus(i);
    return p;
}

struct DpBuckets {
    double w_sat = 0.0;
    double w_unsat = 0.0;
};

DpBuckets dp_buckets(const BooleanFitnessFunction& f, const ProductPoint& mu) {
    const auto pmf = count_distribution(plus_probabilities(mu));
    Neumaier sat, unsat;
    for (int c = 0; c <= f.n(); ++c) {
        if (f.count_satisfied(c)) {
            sat.add(pmf[static_cast<std::size_t>(c)]);
        } else {
            unsat.add(pmf[static_cast<std::size_t>(c)]);
        }
    }
    return {sat.value(), unsat.value()};
}

double dp_extension(const BooleanFitnessFunction& f, const ProductPoint& mu) {
    const auto b = dp_buckets(f, mu);
    return combine_buckets(f.landscape().satisfied_value(),
                           f.landscape().unsatisfied_value(), b.w_sat,
                           b.w_unsat);
}

double dp_sat_probability(const BooleanFitnessFunction& f,
                          const ProductPoint& mu) {
    const auto b = dp_buckets(f, mu);
    return b.w_unsat == 0.0 ? 1.0 : b.w_sat;
}

SelectionMoments dp_selection_moments(const BooleanFitnessFunction& f,
                                      const ProductPoint& mu) {
    const int n = f.n();
    const auto p = plus_probabilities(mu);
    const auto pre = prefix_counts(p);
    const auto suf = suffix_counts(p);

    SelectionMoments out;
    out.mean_fx.assign(static_cast<std::size_t>(n), 0.0);
    {
        const auto& pmf = pre[static_cast<std::size_t>(n)];
        Neumaier sat, unsat;
        for (int c = 0; c <= n; ++c) {
            const double w = pmf[static_cast<std::size_t>(c)];
            if (f.count_satisfied(c)) {
                sat.add(w);
            } else {
                unsat.add(w);
            }
        }
        const double vs = f.landscape().satisfied_value();
        const double vu = f.landscape().unsatisfied_value();
        out.mean_fitness = combine_buckets(vs, vu, sat.value(), unsat.value());
        out.sat_probability = unsat.value() == 0.0 ? 1.0 : sat.value();
        out.mean_f_squared =
            combine_buckets(vs * vs, vu * vu, sat.value(), unsat.value());
    }
    for (int i = 0; i < n; ++i) {
        const auto rest = convolve(pre[static_cast<std::size_t>(i)],
                                   suf[static_cast<std::size_t>(i) + 1]);
        Neumaier acc;
        for (int c = 0; c < n; ++c) {
            const double w = rest[static_cast<std::size_t>(c)];
            const double up =
                f.landscape().value(f.count_satisfied(c + 1));
            const double down = f.landscape().value(f.count_satisfied(c));
            acc.add(w * (p[static_cast<std::size_t>(i)] * up -
                         (1.0 - p[static_cast<std::size_t>(i)]) * down));
        }
        out.mean_fx[static_cast<std::size_t>(i)] = acc.value();
    }
    return out;
}

double dp_gradient(const BooleanFitnessFunction& f, const ProductPoint& mu,
                   int locus) {
    const int n = f.n();
    const auto p = plus_probabilities(mu);
    const auto pre = prefix_counts(p);
    const auto suf = suffix_counts(p);
    const auto rest = convolve(pre[static_cast<std::size_t>(locus)],
                               suf[static_cast<std::size_t>(locus) + 1]);
    // extension = p_i * A + (1-p_i) * B, and dp_i/dmu_i = 1/2
    Neumaier acc;
    for (int c = 0; c < n; ++c) {
        const double w = rest[static_cast<std::size_t>(c)];
        acc.add(w * (f.landscape().value(f.count_satisfied(c + 1)) -
                     f.landscape().value(f.count_satisfied(c))));
    }
    return 0.5 * acc.value();
}

double dp_pair_raw_moment(const BooleanFitnessFunction& f,
                          const ProductPoint& mu, int i, int j) {
    // E[f * x_i * x_j] by leaving both loci out of the count DP
    const int n = f.n();
    const auto p = plus_probabilities(mu);
    const int lo = std::min(i, j), hi = std::max(i, j);
    const auto pre = prefix_counts(p);
    const auto suf = suffix_counts(p);
    std::vector<double> mid = {1.0};
    for (int l = lo + 1; l < hi; ++l)
        mid = convolve(mid, {1.0 - p[static_cast<std::size_t>(l)],
                             p[static_cast<std::size_t>(l)]});
    auto rest = convolve(pre[static_cast<std::size_t>(lo)], mid);
    rest = convolve(rest, suf[static_cast<std::size_t>(hi) + 1]);

    const double pi = p[static_cast<std::size_t>(i)];
    const double pj = p[static_cast<std::size_t>(j)];
    Neumaier acc;
    for (int c = 0; c <= n - 2; ++c) {
        const double w = rest[static_cast<std::size_t>(c)];
        const double l0 = f.landscape().value(f.count_satisfied(c));
        const double l1 = f.landscape().value(f.count_satisfied(c + 1));
        const double l2 = f.landscape().value(f.count_satisfied(c + 2));
        acc.add(w * (pi * pj * l2 - pi * (1.0 - pj) * l1 -
                     (1.0 - pi) * pj * l1 + (1.0 - pi) * (1.0 - pj) * l0));
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Backend dispatch
// ---------------------------------------------------------------------------

enum class Chosen { Enum, Dp };

Chosen choose(const BooleanFitnessFunction& f, EvalBackend backend) {
    switch (backend) {
        case EvalBackend::Enumeration:
            if (f.n() > kMaxEnumerationN)
                throw_capability("enumeration backend limited to n <= 24");
            return Chosen::Enum;
        case EvalBackend::CountDp:
            if (!f.is_count_family())
                throw_capability(
                    "count dynamic program requires Threshold or SumEqualsK");
            return Chosen::Dp;
        case EvalBackend::Auto:
            if (f.n() <= kMaxEnumerationN) return Chosen::Enum;
            if (f.is_count_family()) return Chosen::Dp;
            throw_capability(
                "n beyond the exact enumeration cap with a predicate family "
                "the dynamic program does not support");
    }
    throw_argument("bad backend");
}

void check_dims(const BooleanFitnessFunction& f, const ProductPoint& mu) {
    if (mu.size() != f.n())
        throw_argument("product point dimension mismatch");
}

}  // namespace

std::vector<double> count_distribution(const std::vector<double>& p_plus) {
    std::vector<double> c(p_plus.size() + 1, 0.0);
    c[0] = 1.0;
    for (std::size_t i = 0; i < p_plus.size(); ++i) {
        const double p = p_plus[i];
        for (std::size_t j = i + 1; j-- > 0;) {
            c[j + 1] += c[j] * p;
            c[j] *= (1.0 - p);
        }
    }
    return c;
}

double extension(const BooleanFitnessFunction& f, const ProductPoint& mu,
                 EvalBackend backend) {
    check_dims(f, mu);
    if (choose(f, backend) == Chosen::Dp) return dp_extension(f, mu);
    const auto sums = enum_bucket_sums(f, mu, false);
    return combine_buckets(f.landscape().satisfied_value(),
                           f.landscape().unsatisfied_value(), sums.w_sat,
                           sums.w_unsat);
}

double satisfaction_probability(const BooleanFitnessFunction& f,
                                const ProductPoint& mu, EvalBackend backend) {
    check_dims(f, mu);
    if (choose(f, backend) == Chosen::Dp) return dp_sat_probability(f, mu);
    const auto sums = enum_bucket_sums(f, mu, false);
    return sums.w_unsat == 0.0 ? 1.0 : sums.w_sat;
}

SelectionMoments selection_moments(const BooleanFitnessFunction& f,
                                   const ProductPoint& mu,
                                   EvalBackend backend) {
    check_dims(f, mu);
    if (choose(f, backend) == Chosen::Dp) return dp_selection_moments(f, mu);
    const auto sums = enum_bucket_sums(f, mu, true);
    const double vs = f.landscape().satisfied_value();
    const double vu = f.landscape().unsatisfied_value();
    SelectionMoments out;
    out.mean_fitness = combine_buckets(vs, vu, sums.w_sat, sums.w_unsat);
    out.sat_probability = sums.w_unsat == 0.0 ? 1.0 : sums.w_sat;
    out.mean_f_squared =
        combine_buckets(vs * vs, vu * vu, sums.w_sat, sums.w_unsat);
    out.mean_fx.resize(static_cast<std::size_t>(f.n()));
    for (int i = 0; i < f.n(); ++i)
        out.mean_fx[static_cast<std::size_t>(i)] =
            vs * sums.sx_sat[static_cast<std::size_t>(i)] +
            vu * sums.sx_unsat[static_cast<std::size_t>(i)];
    return out;
}

double extension_gradient(const BooleanFitnessFunction& f,
                          const ProductPoint& point, int locus,
                          EvalBackend backend) {
    check_dims(f, point);
    if (locus < 0 || locus >= f.n()) throw_argument("locus out of range");
    if (choose(f, backend) == Chosen::Dp) return dp_gradient(f, point, locus);
    const double hi = extension(f, point.with_coordinate(locus, 1.0), backend);
    const double lo =
        extension(f, point.with_coordinate(locus, -1.0), backend);
    return 0.5 * (hi - lo);
}

double coefficient(const BooleanFitnessFunction& f,
                   const std::vector<int>& subset, const ProductPoint& mu,
                   EvalBackend backend) {
    check_dims(f, mu);
    for (std::size_t k = 0; k < subset.size(); ++k) {
        const int i = subset[k];
        if (i < 0 || i >= f.n()) throw_argument("subset locus out of range");
        if (k > 0 && subset[k] <= subset[k - 1])
            throw_argument("subset must be strictly increasing");
        if (mu.sigma_sq(i) == 0.0)
            throw_degenerate("sigma_i = 0 inside the requested subset");
    }
    if (subset.empty()) return extension(f, mu, backend);
    if (choose(f, backend) == Chosen::Dp) {
        const auto m = dp_selection_moments(f, mu);
        if (subset.size() == 1) {
            const int i = subset[0];
            return (m.mean_fx[static_cast<std::size_t>(i)] -
                    mu[i] * m.mean_fitness) /
                   mu.sigma(i);
        }
        if (subset.size() == 2) {
            const int i = subset[0], j = subset[1];
            const double exij = dp_pair_raw_moment(f, mu, i, j);
            return (exij - mu[j] * m.mean_fx[static_cast<std::size_t>(i)] -
                    mu[i] * m.mean_fx[static_cast<std::size_t>(j)] +
                    mu[i] * mu[j] * m.mean_fitness) /
                   (mu.sigma(i) * mu.sigma(j));
        }
        throw_capability(
            "count dynamic program computes coefficients up to order 2");
    }
    return enum_coefficient(f, subset, mu);
}

std::vector<double> linear_coefficients(const BooleanFitnessFunction& f,
                                        const ProductPoint& mu,
                                        EvalBackend backend) {
    check_dims(f, mu);
    std::vector<double> out(static_cast<std::size_t>(f.n()), 0.0);
    if (choose(f, backend) == Chosen::Dp) {
        const auto m = dp_selection_moments(f, mu);
        for (int i = 0; i < f.n(); ++i) {
            if (mu.sigma_sq(i) == 0.0) continue;  // vertex convention
            out[static_cast<std::size_t>(i)] =
                (m.mean_fx[static_cast<std::size_t>(i)] -
                 mu[i] * m.mean_fitness) /
                mu.sigma(i);
        }
        return out;
    }
    for (int i = 0; i < f.n(); ++i) {
        if (mu.sigma_sq(i) == 0.0) continue;  // vertex convention
        out[static_cast<std::size_t>(i)] = enum_coefficient(f, {i}, mu);
    }
    return out;
}

}  // namespace boolution

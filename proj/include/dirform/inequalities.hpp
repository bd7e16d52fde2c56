#ifndef DIRFORM_INEQUALITIES_HPP
#define DIRFORM_INEQUALITIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirform/energy.hpp"
#include "dirform/report.hpp"

namespace dirform {

/// A map F: ℝⁿ → ℝ from the built-in catalog. Membership in the normal
/// contraction class (F(0) = 0, |F(x) − F(y)| ≤ Σ|xᵢ − yᵢ|) is checked by
/// verify() on sampled points, not assumed.
class NormalContraction {
public:
    using Fn = std::function<double(std::span<const double>)>;

    NormalContraction(std::string name, std::size_t arity, Fn fn)
        : name_(std::move(name)), arity_(arity), fn_(std::move(fn))
    {
    }

    static NormalContraction identity()
    {
        return {"identity", 1, [](std::span<const double> x) { return x[0]; }};
    }
    static NormalContraction unit_truncation()
    {
        return {"unit_truncation", 1, [](std::span<const double> x) { return std::clamp(x[0], 0.0, 1.0); }};
    }
    static NormalContraction absolute()
    {
        return {"absolute", 1, [](std::span<const double> x) { return std::abs(x[0]); }};
    }
    static NormalContraction minimum(std::size_t n)
    {
        return {"min" + std::to_string(n), n,
                [](std::span<const double> x) { return *std::min_element(x.begin(), x.end()); }};
    }
    static NormalContraction maximum(std::size_t n)
    {
        return {"max" + std::to_string(n), n,
                [](std::span<const double> x) { return *std::max_element(x.begin(), x.end()); }};
    }
    static NormalContraction mean(std::size_t n)
    {
        return {"mean" + std::to_string(n), n, [](std::span<const double> x) {
                    double s = 0.0;
                    for (double v : x) s += v;
                    return s / static_cast<double>(x.size());
                }};
    }
    /// outer ∘ inner with outer of arity one.
    static NormalContraction compose(const NormalContraction& outer, const NormalContraction& inner)
    {
        if (outer.arity() != 1)
            throw Error(ErrorCode::invalid_argument, "outer map of a composition must have arity 1");
        auto fo = outer.fn_;
        auto fi = inner.fn_;
        return {outer.name() + "(" + inner.name() + ")", inner.arity(), [fo, fi](std::span<const double> x) {
                    const double y = fi(x);
                    return fo(std::span<const double>(&y, 1));
                }};
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t arity() const noexcept { return arity_; }
    double operator()(std::span<const double> x) const { return fn_(x); }

    /// Applies F vertexwise to (f_1, …, f_n).
    FunctionVector apply(std::span<const FunctionVector> fs) const
    {
        if (fs.size() != arity_)
            throw Error(ErrorCode::invalid_argument, name_ + " expects " + std::to_string(arity_) + " functions");
        const Eigen::Index n = fs.front().size();
        FunctionVector out(n);
        std::vector<double> point(arity_);
        for (Eigen::Index v = 0; v < n; ++v) {
            for (std::size_t i = 0; i < arity_; ++i) point[i] = fs[i][v];
            out[v] = fn_(point);
        }
        return out;
    }

    /// Checks the contraction definition on `samples` random pairs in [−3, 3]ⁿ.
    bool verify(std::uint64_t seed = 0x5eed, int samples = 2000) const
    {
        std::vector<double> zero(arity_, 0.0);
        if (std::abs(fn_(zero)) > 1e-15) return false;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-3.0, 3.0);
        std::vector<double> x(arity_), y(arity_);
        for (int s = 0; s < samples; ++s) {
            double l1 = 0.0;
            for (std::size_t i = 0; i < arity_; ++i) {
                x[i] = dist(rng);
                y[i] = s % 4 == 0 ? x[i] + 1e-3 * dist(rng) : dist(rng);
                l1 += std::abs(x[i] - y[i]);
            }
            if (std::abs(fn_(x) - fn_(y)) > l1 * (1.0 + 1e-12) + 1e-15) return false;
        }
        return true;
    }

private:
    std::string name_;
    std::size_t arity_;
    Fn fn_;
};

inline std::vector<NormalContraction> contraction_catalog(std::size_t max_arity = 3)
{
    std::vector<NormalContraction> out{NormalContraction::identity(), NormalContraction::unit_truncation(),
                                       NormalContraction::absolute()};
    for (std::size_t n = 2; n <= max_arity; ++n) {
        out.push_back(NormalContraction::minimum(n));
        out.push_back(NormalContraction::maximum(n));
        out.push_back(NormalContraction::mean(n));
        out.push_back(NormalContraction::compose(NormalContraction::unit_truncation(), NormalContraction::mean(n)));
        out.push_back(NormalContraction::compose(NormalContraction::absolute(), NormalContraction::minimum(n)));
    }
    return out;
}

namespace detail {

/// √(E(fh, f) − ½E(f², h)), clamping roundoff negatives above −1e-12·scale.
inline double localized_energy_root(const ResistanceNetwork& net, const FunctionVector& f, const FunctionVector& h,
                                    const char* side)
{
    const double radicand = energy(net, f.cwiseProduct(h), f) - 0.5 * energy(net, f.cwiseProduct(f), h);
    const double scale = 1.0 + energy(net, f) * (h.cwiseAbs().maxCoeff() + 1.0);
    if (radicand < -1e-12 * scale)
        throw Error(ErrorCode::internal, std::string(side) + " radicand is negative beyond roundoff");
    return std::sqrt(std::max(radicand, 0.0));
}

}  // namespace detail

/// (E(gh,g) − ½E(g²,h))^{1/2} ≤ Σᵢ (E(fᵢh,fᵢ) − ½E(fᵢ²,h))^{1/2} with g = F(f_1, …, f_n).
inline Report check_contraction_inequality(const ResistanceNetwork& net, const NormalContraction& contraction,
                                           std::span<const FunctionVector> fs, const FunctionVector& h,
                                           double tolerance = 1e-12)
{
    require_vertex_function(net, h, "h");
    for (const auto& f : fs) require_vertex_function(net, f, "f_i");
    if ((h.array() < 0.0).any()) throw Error(ErrorCode::invalid_argument, "h must be nonnegative");
    if (!contraction.verify())
        throw Error(ErrorCode::invalid_argument, contraction.name() + " is not a normal contraction");
    const FunctionVector g = contraction.apply(fs);
    const double lhs = detail::localized_energy_root(net, g, h, "left-hand");
    double rhs = 0.0;
    for (const auto& f : fs) rhs += detail::localized_energy_root(net, f, h, "right-hand");
    return bound_report("contraction:" + contraction.name(), lhs, rhs, tolerance * (1.0 + rhs));
}

/// Γ(fg)(A)^{1/2} ≤ sup|f| Γ(g)(A)^{1/2} + sup|g| Γ(f)(A)^{1/2} for A = X and A = the
/// closed star of every vertex. For a star the suprema run over its edge
/// closure (every vertex sharing an edge with A), since Γ(·)(A) reads values there.
inline std::vector<Report> check_product_inequality(const ResistanceNetwork& net, const FunctionVector& f,
                                                    const FunctionVector& g, double tolerance = 1e-12)
{
    const EnergyMeasureVector gamma_fg = energy_measure(net, f.cwiseProduct(g));
    const EnergyMeasureVector gamma_f = energy_measure(net, f);
    const EnergyMeasureVector gamma_g = energy_measure(net, g);
    const std::size_t n = net.num_vertices();

    auto evaluate = [&](std::string name, const std::vector<std::size_t>& set, const std::vector<std::size_t>& closure) {
        double a = 0.0, bf = 0.0, bg = 0.0, sf = 0.0, sg = 0.0;
        for (auto v : set) {
            const auto i = static_cast<Eigen::Index>(v);
            a += gamma_fg[i];
            bf += gamma_f[i];
            bg += gamma_g[i];
        }
        for (auto v : closure) {
            sf = std::max(sf, std::abs(f[static_cast<Eigen::Index>(v)]));
            sg = std::max(sg, std::abs(g[static_cast<Eigen::Index>(v)]));
        }
        const double lhs = std::sqrt(std::max(a, 0.0));
        const double rhs = sf * std::sqrt(std::max(bg, 0.0)) + sg * std::sqrt(std::max(bf, 0.0));
        return bound_report(std::move(name), lhs, rhs, tolerance * (1.0 + rhs));
    };

    std::vector<Report> out;
    std::vector<std::size_t> all(n);
    for (std::size_t v = 0; v < n; ++v) all[v] = v;
    out.push_back(evaluate("product:X", all, all));

    for (std::size_t v = 0; v < n; ++v) {
        std::vector<char> in_star(n, 0), in_closure(n, 0);
        in_star[v] = 1;
        for (auto e : net.incident(v)) in_star[net.other_end(e, v)] = 1;
        for (std::size_t u = 0; u < n; ++u) {
            if (!in_star[u]) continue;
            in_closure[u] = 1;
            for (auto e : net.incident(u)) in_closure[net.other_end(e, u)] = 1;
        }
        std::vector<std::size_t> star, closure;
        for (std::size_t u = 0; u < n; ++u) {
            if (in_star[u]) star.push_back(u);
            if (in_closure[u]) closure.push_back(u);
        }
        out.push_back(evaluate("product:star(" + net.id(v) + ")", star, closure));
    }
    return out;
}

}  // namespace dirform

#endif

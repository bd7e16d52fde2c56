#ifndef DIRFORM_NETWORK_HPP
#define DIRFORM_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dirform/error.hpp"

namespace dirform {

/// Real-valued function on the vertices, indexed in network vertex order.
using FunctionVector = Eigen::VectorXd;
/// Per-vertex energy measure Γ(f,g)({x}).
using EnergyMeasureVector = Eigen::VectorXd;

struct Edge {
    std::size_t tail;
    std::size_t head;
    double conductance;
};

struct EdgeSpec {
    std::string u;
    std::string v;
    double c;
};

/// Input form of a network before validation.
struct NetworkDescription {
    std::vector<std::string> vertices;
    std::vector<EdgeSpec> edges;
};

/// Finite connected weighted graph carrying E(f) = Σ_e c_e (f(head) − f(tail))².
///
/// Vertex order is the input order. Each edge is oriented from the
/// lexicographically smaller vertex id to the larger one unless the network was
/// explicitly reoriented. Instances are immutable.
class ResistanceNetwork {
public:
    static ResistanceNetwork build(const NetworkDescription& description)
    {
        ResistanceNetwork net;
        if (description.vertices.empty())
            throw Error(ErrorCode::invalid_argument, "network has no vertices");
        for (std::size_t i = 0; i < description.vertices.size(); ++i) {
            const auto& id = description.vertices[i];
            if (id.empty())
                throw Error(ErrorCode::invalid_argument, "vertex " + std::to_string(i) + " has an empty id");
            if (!net.index_.emplace(id, i).second)
                throw Error(ErrorCode::invalid_argument, "duplicate vertex id '" + id + "'");
        }
        net.ids_ = description.vertices;

        std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
        for (std::size_t k = 0; k < description.edges.size(); ++k) {
            const auto& spec = description.edges[k];
            const std::string label = "edge " + std::to_string(k) + " (" + spec.u + ", " + spec.v + ")";
            auto iu = net.index_.find(spec.u);
            auto iv = net.index_.find(spec.v);
            if (iu == net.index_.end() || iv == net.index_.end()) {
                const auto& missing = iu == net.index_.end() ? spec.u : spec.v;
                throw Error(ErrorCode::unknown_vertex, label + ": unknown vertex '" + missing + "'");
            }
            if (iu->second == iv->second)
                throw Error(ErrorCode::invalid_argument, label + ": self-loop");
            if (!(spec.c > 0.0) || !std::isfinite(spec.c))
                throw Error(ErrorCode::invalid_argument,
                            label + ": conductance must be positive and finite, got " + std::to_string(spec.c));
            auto key = std::minmax(iu->second, iv->second);
            if (auto [it, inserted] = seen.emplace(key, k); !inserted)
                throw Error(ErrorCode::duplicate_edge,
                            label + ": duplicates edge " + std::to_string(it->second));
            std::size_t tail = iu->second;
            std::size_t head = iv->second;
            if (net.ids_[head] < net.ids_[tail]) std::swap(tail, head);
            net.edges_.push_back({tail, head, spec.c});
        }
        net.finish();
        return net;
    }

    /// Index-based construction used by the space builders.
    static ResistanceNetwork from_edges(std::vector<std::string> ids, std::span<const Edge> edges)
    {
        NetworkDescription description;
        description.vertices = std::move(ids);
        description.edges.reserve(edges.size());
        for (const auto& e : edges) {
            if (e.tail >= description.vertices.size() || e.head >= description.vertices.size())
                throw Error(ErrorCode::unknown_vertex, "edge endpoint index out of range");
            description.edges.push_back({description.vertices[e.tail], description.vertices[e.head], e.conductance});
        }
        return build(description);
    }

    std::size_t num_vertices() const noexcept { return ids_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    /// Dimension of the cycle space, |E| − |V| + 1.
    std::size_t cycle_rank() const noexcept { return edges_.size() + 1 - ids_.size(); }

    const std::vector<std::string>& vertex_ids() const noexcept { return ids_; }
    const std::string& id(std::size_t v) const { return ids_.at(v); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_.at(e); }
    std::span<const std::size_t> incident(std::size_t v) const
    {
        return std::span<const std::size_t>(incidence_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
    }

    bool contains(std::string_view id) const { return index_.find(std::string(id)) != index_.end(); }
    std::size_t index_of(std::string_view id) const
    {
        auto it = index_.find(std::string(id));
        if (it == index_.end())
            throw Error(ErrorCode::unknown_vertex, "unknown vertex '" + std::string(id) + "'");
        return it->second;
    }

    /// +1 if v is the head of e, −1 if it is the tail, 0 otherwise.
    int incidence_sign(std::size_t e, std::size_t v) const
    {
        const auto& edge = edges_[e];
        if (edge.head == v) return 1;
        if (edge.tail == v) return -1;
        return 0;
    }

    std::size_t other_end(std::size_t e, std::size_t v) const
    {
        const auto& edge = edges_[e];
        return edge.head == v ? edge.tail : edge.head;
    }

    Eigen::VectorXd conductances() const
    {
        Eigen::VectorXd c(static_cast<Eigen::Index>(edges_.size()));
        for (std::size_t e = 0; e < edges_.size(); ++e) c[static_cast<Eigen::Index>(e)] = edges_[e].conductance;
        return c;
    }

    /// Signed incidence matrix D with (Df)_e = f(head_e) − f(tail_e).
    Eigen::MatrixXd incidence_matrix() const
    {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), cols());
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            d(ix(e), ix(edges_[e].head)) = 1.0;
            d(ix(e), ix(edges_[e].tail)) = -1.0;
        }
        return d;
    }

    /// Combinatorial Laplacian Σ_e c_e (1_head − 1_tail)(1_head − 1_tail)ᵀ.
    Eigen::MatrixXd laplacian() const { return weighted_laplacian(conductances()); }

    /// Laplacian of the same graph with edge weights w in place of the conductances.
    Eigen::MatrixXd weighted_laplacian(const Eigen::VectorXd& w) const
    {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(cols(), cols());
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto u = ix(edges_[e].tail);
            const auto v = ix(edges_[e].head);
            const double we = w[ix(e)];
            l(u, u) += we;
            l(v, v) += we;
            l(u, v) -= we;
            l(v, u) -= we;
        }
        return l;
    }

    /// Copy with the edges whose flag is set pointing the other way.
    ResistanceNetwork reoriented(std::span<const bool> flip) const
    {
        if (flip.size() != edges_.size())
            throw Error(ErrorCode::index_mismatch, "reorientation mask has wrong length");
        ResistanceNetwork copy = *this;
        for (std::size_t e = 0; e < edges_.size(); ++e)
            if (flip[e]) std::swap(copy.edges_[e].tail, copy.edges_[e].head);
        return copy;
    }

    /// Vertex sets of the connected components, in order of first vertex.
    std::vector<std::vector<std::size_t>> components() const
    {
        const std::size_t n = ids_.size();
        std::vector<std::size_t> label(n, n);
        std::vector<std::vector<std::size_t>> result;
        for (std::size_t s = 0; s < n; ++s) {
            if (label[s] != n) continue;
            std::vector<std::size_t> comp{s};
            label[s] = result.size();
            for (std::size_t i = 0; i < comp.size(); ++i) {
                for (auto e : incident(comp[i])) {
                    auto w = other_end(e, comp[i]);
                    if (label[w] == n) {
                        label[w] = result.size();
                        comp.push_back(w);
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            result.push_back(std::move(comp));
        }
        return result;
    }

private:
    static Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }
    Eigen::Index rows() const { return ix(edges_.size()); }
    Eigen::Index cols() const { return ix(ids_.size()); }

    void finish()
    {
        const std::size_t n = ids_.size();
        offsets_.assign(n + 1, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.tail + 1];
            ++offsets_[e.head + 1];
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        incidence_.assign(offsets_.back(), 0);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            incidence_[fill[edges_[e].tail]++] = e;
            incidence_[fill[edges_[e].head]++] = e;
        }
        auto comps = components();
        if (comps.size() > 1) {
            std::string msg = "network is disconnected: " + std::to_string(comps.size()) + " components";
            for (const auto& comp : comps) {
                msg += " {";
                for (std::size_t i = 0; i < comp.size(); ++i) {
                    if (i == 8) {
                        msg += ", ...";
                        break;
                    }
                    msg += (i ? ", " : "") + ids_[comp[i]];
                }
                msg += "}";
            }
            throw Error(ErrorCode::disconnected, msg);
        }
    }

    std::vector<std::string> ids_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> incidence_;
};

/// Strictly positive vertex weights: a reference measure μ or an energy
/// dominant measure m.
class MeasureVector {
public:
    MeasureVector() = default;
    explicit MeasureVector(Eigen::VectorXd weights) : weights_(std::move(weights))
    {
        for (Eigen::Index i = 0; i < weights_.size(); ++i) {
            if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
                throw Error(ErrorCode::invalid_argument,
                            "measure weight at vertex " + std::to_string(i) + " must be positive, got " +
                                std::to_string(weights_[i]));
        }
    }

    static MeasureVector uniform(std::size_t n, double value = 1.0)
    {
        return MeasureVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value));
    }

    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    double operator[](std::size_t v) const { return weights_[static_cast<Eigen::Index>(v)]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
    double total() const { return weights_.sum(); }
    MeasureVector scaled(double factor) const { return MeasureVector(weights_ * factor); }

private:
    Eigen::VectorXd weights_;
};

inline void require_vertex_function(const ResistanceNetwork& net, const Eigen::VectorXd& f, const char* what)
{
    if (static_cast<std::size_t>(f.size()) != net.num_vertices())
        throw Error(ErrorCode::index_mismatch, std::string(what) + " has " + std::to_string(f.size()) +
                                                   " entries, network has " + std::to_string(net.num_vertices()) +
                                                   " vertices");
}

inline void require_edge_function(const ResistanceNetwork& net, const Eigen::VectorXd& w, const char* what)
{
    if (static_cast<std::size_t>(w.size()) != net.num_edges())
        throw Error(ErrorCode::index_mismatch, std::string(what) + " has " + std::to_string(w.size()) +
                                                   " entries, network has " + std::to_string(net.num_edges()) +
                                                   " edges");
}

inline void require_measure(const ResistanceNetwork& net, const MeasureVector& mu, const char* what)
{
    if (mu.size() != net.num_vertices())
        throw Error(ErrorCode::index_mismatch, std::string(what) + " has " + std::to_string(mu.size()) +
                                                   " weights, network has " + std::to_string(net.num_vertices()) +
                                                   " vertices");
}

inline FunctionVector indicator(const ResistanceNetwork& net, std::size_t v)
{
    FunctionVector f = FunctionVector::Zero(static_cast<Eigen::Index>(net.num_vertices()));
    f[static_cast<Eigen::Index>(v)] = 1.0;
    return f;
}

/// Edge differences (∂f)_e = f(head_e) − f(tail_e).
inline Eigen::VectorXd edge_differences(const ResistanceNetwork& net, const FunctionVector& f)
{
    require_vertex_function(net, f, "function");
    Eigen::VectorXd d(static_cast<Eigen::Index>(net.num_edges()));
    const auto edges = net.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        d[static_cast<Eigen::Index>(e)] =
            f[static_cast<Eigen::Index>(edges[e].head)] - f[static_cast<Eigen::Index>(edges[e].tail)];
    return d;
}

/// Endpoint averages ½(f(tail_e) + f(head_e)).
inline Eigen::VectorXd edge_averages(const ResistanceNetwork& net, const FunctionVector& f)
{
    require_vertex_function(net, f, "function");
    Eigen::VectorXd d(static_cast<Eigen::Index>(net.num_edges()));
    const auto edges = net.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        d[static_cast<Eigen::Index>(e)] =
            0.5 * (f[static_cast<Eigen::Index>(edges[e].head)] + f[static_cast<Eigen::Index>(edges[e].tail)]);
    return d;
}

}  // namespace dirform

#endif

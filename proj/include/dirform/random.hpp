#ifndef DIRFORM_RANDOM_HPP
#define DIRFORM_RANDOM_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dirform/network.hpp"

namespace dirform {

struct RandomNetworkOptions {
    std::size_t min_vertices = 2;
    std::size_t max_vertices = 8;
    double extra_edge_probability = 0.3;  // per non-tree vertex pair
    double min_conductance = 0.2;
    double max_conductance = 5.0;
};

/// Connected network on "v0".."v{n-1}": a random recursive spanning tree plus
/// independent extra edges.
inline ResistanceNetwork random_network(std::mt19937_64& rng, const RandomNetworkOptions& opt = {})
{
    if (opt.min_vertices < 1 || opt.max_vertices < opt.min_vertices)
        throw Error(ErrorCode::invalid_argument, "invalid vertex-count range for random networks");
    std::uniform_int_distribution<std::size_t> count(opt.min_vertices, opt.max_vertices);
    std::uniform_real_distribution<double> conductance(opt.min_conductance, opt.max_conductance);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = count(rng);

    NetworkDescription desc;
    for (std::size_t i = 0; i < n; ++i) desc.vertices.push_back("v" + std::to_string(i));
    std::set<std::pair<std::size_t, std::size_t>> used;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        used.emplace(j, i);
        desc.edges.push_back({desc.vertices[j], desc.vertices[i], conductance(rng)});
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (used.count({i, j})) continue;
            if (unit(rng) < opt.extra_edge_probability)
                desc.edges.push_back({desc.vertices[i], desc.vertices[j], conductance(rng)});
        }
    return ResistanceNetwork::build(desc);
}

inline FunctionVector random_function(std::mt19937_64& rng, std::size_t n, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    FunctionVector f(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
    return f;
}

/// Strictly positive weights drawn from [lo, hi].
inline MeasureVector random_measure(std::mt19937_64& rng, std::size_t n, double lo = 0.5, double hi = 2.0)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = dist(rng);
    return MeasureVector(w);
}

}  // namespace dirform

#endif

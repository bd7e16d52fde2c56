#ifndef DIRFORM_TESTS_FIXTURES_HPP
#define DIRFORM_TESTS_FIXTURES_HPP

#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirform/network.hpp"

namespace fixture {

using dirform::EdgeSpec;
using dirform::NetworkDescription;
using dirform::ResistanceNetwork;

inline ResistanceNetwork make(std::vector<std::string> vertices, std::vector<EdgeSpec> edges)
{
    return ResistanceNetwork::build(NetworkDescription{std::move(vertices), std::move(edges)});
}

inline ResistanceNetwork two_vertex(double c = 1.0) { return make({"x", "y"}, {{"x", "y", c}}); }

inline ResistanceNetwork unit_path(std::size_t edges)
{
    std::vector<std::string> ids;
    std::vector<EdgeSpec> es;
    for (std::size_t i = 0; i <= edges; ++i) ids.push_back("v" + std::to_string(i));
    for (std::size_t i = 0; i < edges; ++i) es.push_back({ids[i], ids[i + 1], 1.0});
    return make(ids, es);
}

inline ResistanceNetwork triangle(double c01 = 1.0, double c12 = 1.0, double c02 = 1.0)
{
    return make({"a", "b", "c"}, {{"a", "b", c01}, {"b", "c", c12}, {"a", "c", c02}});
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace fixture

#endif

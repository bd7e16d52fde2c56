#ifndef DIRFORM_REPORT_HPP
#define DIRFORM_REPORT_HPP

#include <string>
#include <vector>

namespace dirform {

/// Outcome of one inequality or identity check: lhs compared against rhs.
struct Report {
    std::string check;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Report for lhs ≤ rhs + tolerance.
inline Report bound_report(std::string check, double lhs, double rhs, double tolerance)
{
    return Report{std::move(check), lhs, rhs, tolerance, lhs <= rhs + tolerance};
}

/// Report for |lhs − rhs| ≤ tolerance.
inline Report equality_report(std::string check, double lhs, double rhs, double tolerance)
{
    const double diff = lhs > rhs ? lhs - rhs : rhs - lhs;
    return Report{std::move(check), lhs, rhs, tolerance, diff <= tolerance};
}

inline bool all_pass(const std::vector<Report>& reports)
{
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

}  // namespace dirform

#endif

#include "cqc/error.hpp"

#include <sstream>

namespace cqc {

namespace {

std::string describe(const std::vector<double>& query, double bandwidth)
{
    std::ostringstream os;
    os << "no kernel mass at query (";
    for (std::size_t i = 0; i < query.size(); ++i) {
        if (i > 0) os << ", ";
        os << query[i];
    }
    os << ") with bandwidth up to " << bandwidth;
    return os.str();
}

} // namespace

DegenerateMass::DegenerateMass(std::vector<double> query, double bandwidth)
    : NumericalError(describe(query, bandwidth)), query_(std::move(query)), bandwidth_(bandwidth)
{
}

} // namespace cqc

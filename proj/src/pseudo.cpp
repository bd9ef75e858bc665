#include "cqc/pseudo.hpp"

#include "cqc/error.hpp"

#include <string>

namespace cqc {

std::string_view to_string(PseudoKind kind) noexcept
{
    switch (kind) {
    case PseudoKind::dr: return "dr";
    case PseudoKind::ipw: return "ipw";
    case PseudoKind::oracle_dr: return "oracle";
    }
    return "dr";
}

PseudoKind parse_pseudo_kind(std::string_view name)
{
    if (name == "dr") return PseudoKind::dr;
    if (name == "ipw") return PseudoKind::ipw;
    if (name == "oracle" || name == "oracle_dr") return PseudoKind::oracle_dr;
    throw UsageError("unknown pseudo-outcome kind '" + std::string(name) + "' (expected dr, ipw or oracle)");
}

double dr_pseudo_value(int a, double y, double y0, double y1, double propensity, double ccdf0_at_y0,
    double ccdf1_at_y1) noexcept
{
    const double threshold = a == 1 ? y1 : y0;
    const double own_ccdf = a == 1 ? ccdf1_at_y1 : ccdf0_at_y0;
    const double indicator = y <= threshold ? 1.0 : 0.0;
    return propensity_factor(a, propensity) * (indicator - own_ccdf) + ccdf1_at_y1 - ccdf0_at_y0;
}

double dr_pseudo(const Observation& z, double y0, double y1, const NuisanceSource& nuisance)
{
    return dr_pseudo_value(z.a, z.y, y0, y1, nuisance.propensity(z.x), nuisance.ccdf(0, y0, z.x),
        nuisance.ccdf(1, y1, z.x));
}

double ipw_pseudo(const Observation& z, double y0, double y1, const NuisanceSource& nuisance)
{
    const double threshold = z.a == 1 ? y1 : y0;
    return propensity_factor(z.a, nuisance.propensity(z.x)) * (z.y <= threshold ? 1.0 : 0.0);
}

double oracle_pseudo(const Observation& z, double y0, double y1, const NuisanceSource& truth)
{
    return dr_pseudo(z, y0, y1, truth);
}

PseudoEvaluation evaluate_pseudo(PseudoKind kind, const Dataset& data, std::size_t index, double y0, double y1,
    const NuisanceSource& nuisance)
{
    const auto z = observation(data, index);
    double value = 0.0;
    switch (kind) {
    case PseudoKind::dr: value = dr_pseudo(z, y0, y1, nuisance); break;
    case PseudoKind::ipw: value = ipw_pseudo(z, y0, y1, nuisance); break;
    case PseudoKind::oracle_dr: value = oracle_pseudo(z, y0, y1, nuisance); break;
    }
    return {value, y0, y1, index};
}

} // namespace cqc

#include "cqc/baselines.hpp"
#include "cqc/cqc.hpp"
#include "cqc/error.hpp"
#include "cqc/isotonic.hpp"
#include "cqc/simlab.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace cqc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Points to_points(const Array& x)
{
    const auto buf = x.request();
    if (buf.ndim == 1) {
        const auto* p = static_cast<const double*>(buf.ptr);
        return Points(1, {p, p + buf.shape[0]});
    }
    if (buf.ndim != 2) throw UsageError("covariates must be a 1-d or 2-d array");
    const auto* p = static_cast<const double*>(buf.ptr);
    return Points(static_cast<std::size_t>(buf.shape[1]), {p, p + buf.shape[0] * buf.shape[1]});
}

std::vector<double> to_vector(const Array& a)
{
    const auto buf = a.request();
    if (buf.ndim != 1) throw UsageError("expected a 1-d array");
    const auto* p = static_cast<const double*>(buf.ptr);
    return {p, p + buf.shape[0]};
}

Dataset to_dataset(const Array& y, const IntArray& a, const Array& x)
{
    const auto ys = to_vector(y);
    const auto xs = to_points(x);
    const auto abuf = a.request();
    if (abuf.ndim != 1) throw UsageError("treatment must be a 1-d array");
    if (ys.size() != xs.size() || static_cast<std::size_t>(abuf.shape[0]) != ys.size()) {
        throw UsageError("y, a and x must have the same number of rows");
    }
    const auto* ap = static_cast<const int*>(abuf.ptr);
    Dataset d(xs.dim());
    for (std::size_t i = 0; i < ys.size(); ++i) d.add(ys[i], xs.row(i), ap[i]);
    return d;
}

py::tuple from_dataset(const Dataset& d)
{
    const auto n = static_cast<py::ssize_t>(d.size());
    const auto dim = static_cast<py::ssize_t>(d.dim());
    std::vector<int> a(d.treatments().begin(), d.treatments().end());
    return py::make_tuple(Array(n, d.outcomes().data()), IntArray(n, a.data()),
        Array({n, dim}, d.covariates().values().data()));
}

ContrastOptions make_options(const std::string& kernel, double bandwidth_nuisance, double bandwidth_outer, double xi,
    const std::string& pseudo)
{
    ContrastOptions o;
    const auto family = parse_kernel_family(kernel);
    o.nuisance_kernel = {family, bandwidth_nuisance};
    o.outer_kernel = {family, bandwidth_outer};
    o.xi = xi;
    o.kind = parse_pseudo_kind(pseudo);
    o.validate();
    return o;
}

class Estimator {
public:
    Estimator(const Array& y, const IntArray& a, const Array& x, const std::string& kernel, double bandwidth_nuisance,
        double bandwidth_outer, double xi, const std::string& pseudo, bool cross_fit, std::uint64_t seed,
        std::size_t grid_points)
    {
        const auto data = to_dataset(y, a, x);
        const auto options = make_options(kernel, bandwidth_nuisance, bandwidth_outer, xi, pseudo);
        if (options.kind == PseudoKind::oracle_dr) throw UsageError("the oracle pseudo-outcome is simulation-only");
        auto contrast = cross_fit ? ContrastFit::cross_fit(data, seed, options)
                                  : ContrastFit::fit(data, make_split(data, seed), options);
        const auto policy = grid_points == 0 ? GridPolicy::treated() : GridPolicy::uniform(grid_points);
        fit_ = std::make_shared<CqcFit>(std::move(contrast), build_grid(data, policy));
    }

    Array predict(const Array& y0, const Array& x) const
    {
        const auto y0s = to_vector(y0);
        const auto xs = to_points(x);
        const auto est = fit_->estimate_many(y0s, xs);
        Array out(static_cast<py::ssize_t>(est.size()));
        auto m = out.mutable_unchecked<1>();
        for (std::size_t i = 0; i < est.size(); ++i) m(static_cast<py::ssize_t>(i)) = est[i].g_hat;
        return out;
    }

    double contrast(double y0, double y1, const Array& x) const
    {
        const auto v = to_vector(x);
        return fit_->contrast().evaluate(y0, y1, v);
    }

    std::vector<double> grid() const { return fit_->grid(); }

private:
    std::shared_ptr<CqcFit> fit_;
};

} // namespace

PYBIND11_MODULE(_cqc, m)
{
    m.doc() = "Conditional quantile comparator estimation";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "sample_dgp",
        [](const std::string& family, double gamma, std::size_t n, std::uint64_t seed, std::uint64_t dgp_seed) {
            return from_dataset(sample_dgp(DgpSpec::make(parse_dgp_family(family), gamma, dgp_seed), n, seed));
        },
        py::arg("family"), py::arg("gamma"), py::arg("n"), py::arg("seed") = 0, py::arg("dgp_seed") = 0,
        "Draw (y, a, x) from a simulation family.");

    m.def(
        "g_star",
        [](const std::string& family, double gamma, const Array& y, const Array& x, std::uint64_t dgp_seed) {
            const auto t = truth(DgpSpec::make(parse_dgp_family(family), gamma, dgp_seed));
            const auto ys = to_vector(y);
            const auto xs = to_points(x);
            if (ys.size() != xs.size()) throw UsageError("y and x must have the same number of rows");
            std::vector<double> out(ys.size());
            for (std::size_t i = 0; i < ys.size(); ++i) out[i] = t.g_star(ys[i], xs.row(i));
            return out;
        },
        py::arg("family"), py::arg("gamma"), py::arg("y"), py::arg("x"), py::arg("dgp_seed") = 0);

    m.def(
        "pava", [](const Array& v) { return pava_project(to_vector(v)).projected; }, py::arg("values"),
        "Least-squares nondecreasing projection.");

    py::class_<Estimator>(m, "CqcEstimator")
        .def(py::init<const Array&, const IntArray&, const Array&, const std::string&, double, double, double,
                 const std::string&, bool, std::uint64_t, std::size_t>(),
            py::arg("y"), py::arg("a"), py::arg("x"), py::arg("kernel") = "gaussian",
            py::arg("bandwidth_nuisance") = 0.03, py::arg("bandwidth_outer") = 0.8, py::arg("xi") = 0.05,
            py::arg("pseudo") = "dr", py::arg("cross_fit") = true, py::arg("seed") = 0, py::arg("grid_points") = 0)
        .def("predict", &Estimator::predict, py::arg("y0"), py::arg("x"))
        .def("contrast", &Estimator::contrast, py::arg("y0"), py::arg("y1"), py::arg("x"))
        .def_property_readonly("grid", &Estimator::grid);

    m.def(
        "simulate",
        [](const std::string& family, double gamma, std::size_t n_total, std::size_t replications, std::size_t holdout,
            std::uint64_t seed, const std::vector<std::string>& estimators, double bandwidth_nuisance,
            double bandwidth_outer) {
            ExperimentConfig c;
            c.dgp = DgpSpec::make(parse_dgp_family(family), gamma);
            c.n_total = n_total;
            c.replications = replications;
            c.holdout = holdout;
            c.seed = seed;
            for (const auto& name : estimators) {
                EstimatorConfig e;
                e.kind = parse_estimator_kind(name);
                e.contrast.nuisance_kernel = KernelSpec::gaussian(bandwidth_nuisance);
                e.contrast.outer_kernel = KernelSpec::gaussian(bandwidth_outer);
                c.estimators.push_back(e);
            }
            const auto report = run_experiment(c);
            py::dict out;
            for (const auto& s : report.estimators) {
                py::dict row;
                row["mean_abs_error"] = s.mean_abs_error;
                row["ci_low"] = s.ci_low();
                row["ci_high"] = s.ci_high();
                row["replications"] = s.replications;
                row["failures"] = s.failures;
                out[py::str(s.estimator)] = row;
            }
            return out;
        },
        py::arg("family"), py::arg("gamma"), py::arg("n_total") = 1000, py::arg("replications") = 100,
        py::arg("holdout") = 200, py::arg("seed") = 0,
        py::arg("estimators") = std::vector<std::string>{"dr", "ipw", "separate", "oracle"},
        py::arg("bandwidth_nuisance") = 0.03, py::arg("bandwidth_outer") = 0.8,
        "Monte-Carlo error report; returns {estimator: summary}.");
}

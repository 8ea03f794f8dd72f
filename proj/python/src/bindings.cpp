#include "sqsk/bench.hpp"
#include "sqsk/errors.hpp"
#include "sqsk/io.hpp"
#include "sqsk/multi_instance.hpp"
#include "sqsk/nonrobust.hpp"
#include "sqsk/reduction.hpp"
#include "sqsk/report.hpp"
#include "sqsk/sketch.hpp"
#include "sqsk/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace sqsk;

namespace {

Dataset make_dataset(const Matrix& X, const Vector& y)
{
    Dataset d;
    d.X = DataMatrix(X);
    d.y = y;
    d.validate();
    return d;
}

SolverConfig make_config(double tol, int max_newton, double mu, std::uint64_t seed, bool screen)
{
    SolverConfig c;
    c.tol = tol;
    c.max_newton = max_newton;
    c.mu = mu;
    c.seed = seed;
    c.screen = screen;
    return c;
}

#define SQSK_CONFIG_ARGS                                                                                              \
    py::arg("tol") = 1e-8, py::arg("max_newton") = 1000, py::arg("mu") = 10.0, py::arg("seed") = 0,                  \
        py::arg("screen") = true

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Sketched robust square-root LASSO";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<SketchMeta>(m, "SketchMeta")
        .def_readonly("power_iters", &SketchMeta::power_iters)
        .def_readonly("seed", &SketchMeta::seed)
        .def_readonly("spectral_error", &SketchMeta::spectral_error);

    py::class_<Sketch>(m, "Sketch")
        .def(py::init<Matrix, Matrix>(), py::arg("P"), py::arg("Q"))
        .def_property_readonly("P", &Sketch::P)
        .def_property_readonly("Q", &Sketch::Q)
        .def_property_readonly("n", &Sketch::n)
        .def_property_readonly("m", &Sketch::m)
        .def_property_readonly("rank", &Sketch::rank)
        .def_property_readonly("meta", &Sketch::meta)
        .def("gram", &Sketch::gram)
        .def("reconstruct", &Sketch::reconstruct)
        .def(
            "drop_observations",
            [](const Sketch& sk, std::vector<Index> idx) { return sk.drop_rows(idx, SketchSide::observations); },
            py::arg("indices"))
        .def(
            "drop_features",
            [](const Sketch& sk, std::vector<Index> idx) { return sk.drop_rows(idx, SketchSide::features); },
            py::arg("indices"))
        .def("save", [](const Sketch& sk, const std::filesystem::path& p) { save_sketch(sk, p); }, py::arg("path"));

    m.def("load_sketch", &load_sketch, py::arg("path"));

    m.def(
        "power_sketch", [](const Matrix& X, Index k, int iters, std::uint64_t seed) {
            return power_sketch(DataMatrix(X), k, iters, seed);
        },
        py::arg("X"), py::arg("k"), py::arg("power_iters") = 4, py::arg("seed") = 0,
        "Rank-k sketch X ~ P Q^T of an n x m matrix (features x observations).");

    m.def(
        "sketch_error", [](const Matrix& X, const Sketch& sk, int probes, std::uint64_t seed) {
            const SketchError e = sketch_error(DataMatrix(X), sk, probes, seed);
            return py::make_tuple(e.spectral_estimate, e.frobenius_exact);
        },
        py::arg("X"), py::arg("sketch"), py::arg("probes") = 20, py::arg("seed") = 0);

    py::class_<ReducedProblem>(m, "ReducedProblem")
        .def_readonly("R", &ReducedProblem::R)
        .def_readonly("c", &ReducedProblem::c)
        .def_readonly("s", &ReducedProblem::s)
        .def_readonly("kept", &ReducedProblem::kept)
        .def_readonly("rank_deficient", &ReducedProblem::rank_deficient)
        .def("objective", &ReducedProblem::objective, py::arg("w"), py::arg("eps"), py::arg("lam"));

    m.def("reduce", &reduce, py::arg("sketch"), py::arg("y"), py::arg("rank_tol") = 1e-12);
    m.def("screen", &screen, py::arg("problem"), py::arg("eps"), py::arg("lam"));

    py::class_<Solution>(m, "Solution")
        .def_readonly("w", &Solution::w)
        .def_readonly("objective", &Solution::objective)
        .def_readonly("support", &Solution::support)
        .def_readonly("iterations", &Solution::iterations)
        .def_readonly("gap", &Solution::gap)
        .def_property_readonly("status", [](const Solution& s) { return to_string(s.status); });

    m.def(
        "solve_reduced",
        [](const ReducedProblem& rp, double eps, double lam, double tol, int max_newton, double mu,
           std::uint64_t seed, bool screen) {
            py::gil_scoped_release release;
            return solve_reduced(rp, eps, lam, make_config(tol, max_newton, mu, seed, screen));
        },
        py::arg("problem"), py::arg("eps"), py::arg("lam"), SQSK_CONFIG_ARGS);

    m.def(
        "solve_full",
        [](const Matrix& X, const Vector& y, double lam, double tol, int max_newton, double mu, std::uint64_t seed,
           bool screen) {
            py::gil_scoped_release release;
            return solve_full(DataMatrix(X), y, lam, make_config(tol, max_newton, mu, seed, screen));
        },
        py::arg("X"), py::arg("y"), py::arg("lam"), SQSK_CONFIG_ARGS);

    m.def(
        "solve_instance",
        [](const Matrix& A, const Vector& b, double eps, double lam, double tol, int max_newton, double mu,
           std::uint64_t seed, bool screen) {
            GeneralizedInstance inst{A, b, eps, lam};
            return solve_instance(inst, make_config(tol, max_newton, mu, seed, screen));
        },
        py::arg("A"), py::arg("b"), py::arg("eps"), py::arg("lam"), SQSK_CONFIG_ARGS,
        "min ||A w - b|| + eps ||w|| + lam ||w||_1");

    py::class_<DualPoint>(m, "DualPoint")
        .def_readonly("u", &DualPoint::u)
        .def_readonly("t", &DualPoint::t)
        .def_readonly("v", &DualPoint::v)
        .def_readonly("r", &DualPoint::r)
        .def_readonly("feasible", &DualPoint::feasible)
        .def_readonly("value", &DualPoint::value);

    m.def("dual_certificate", &dual_certificate, py::arg("problem"), py::arg("w"), py::arg("eps"), py::arg("lam"));
    m.def("dual_value", &dual_value, py::arg("u"), py::arg("problem"));

    m.def(
        "cardinality_reduce",
        [](const Matrix& A, const Vector& b, const Vector& x, double tol) {
            const CardinalityTrace t = cardinality_reduce(A, b, x, tol);
            py::list steps;
            for (const CardinalityStep& s : t.steps) steps.append(py::make_tuple(s.pivot, s.theta, s.rho));
            return py::make_tuple(t.x, steps);
        },
        py::arg("A"), py::arg("b"), py::arg("x"), py::arg("tol") = 1e-8,
        "Returns (x, [(pivot, theta, rho), ...]).");

    m.def(
        "load_libsvm",
        [](const std::filesystem::path& p) {
            const Dataset d = load_libsvm(p);
            return py::make_tuple(d.X.dense(), d.y);
        },
        py::arg("path"), "Dense (X, y) with X of shape (features, observations).");

    // Drivers return their JSON report, decoded in the Python layer.
    m.def(
        "cross_validate_json",
        [](const Matrix& X, const Vector& y, Index k, Index folds, std::vector<double> lambdas, double eps,
           double tol, int max_newton, double mu, std::uint64_t seed, bool screen) {
            const Dataset d = make_dataset(X, y);
            const SolverConfig cfg = make_config(tol, max_newton, mu, seed, screen);
            py::gil_scoped_release release;
            return cv_report(k > 0 ? cross_validate(d, k, folds, lambdas, eps, cfg)
                                   : cross_validate_full(d, folds, lambdas, cfg));
        },
        py::arg("X"), py::arg("y"), py::arg("k"), py::arg("folds"), py::arg("lambdas"), py::arg("eps"),
        SQSK_CONFIG_ARGS);

    m.def(
        "sparsity_profile_json",
        [](const Matrix& X, const Vector& y, bool robust, Index k, double eps, std::vector<double> lambdas,
           double tol, int max_newton, double mu, std::uint64_t seed, bool screen) {
            const Dataset d = make_dataset(X, y);
            py::gil_scoped_release release;
            return profile_report(sparsity_profile(robust ? ProfileMode::robust : ProfileMode::nonrobust, d, k, eps,
                                                   lambdas, make_config(tol, max_newton, mu, seed, screen)));
        },
        py::arg("X"), py::arg("y"), py::arg("robust"), py::arg("k"), py::arg("eps"), py::arg("lambdas"),
        SQSK_CONFIG_ARGS);

    m.def(
        "bench_json",
        [](std::vector<Index> sizes, Index k, int reps, std::uint64_t seed, bool run_full) {
            BenchConfig cfg;
            cfg.sizes = std::move(sizes);
            cfg.rank = k;
            cfg.repetitions = reps;
            cfg.seed = seed;
            cfg.run_full = run_full;
            py::gil_scoped_release release;
            return bench_report(run_bench(cfg));
        },
        py::arg("sizes"), py::arg("k") = 25, py::arg("repetitions") = 1, py::arg("seed") = 0,
        py::arg("run_full") = true);

    m.attr("SCHEMA_VERSION") = kSchemaVersion;
}

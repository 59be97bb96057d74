// pybind11 bindings for the core operations: step maps, measures, torus
// statistics, the Monte Carlo engine and the exact oracle.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "primwalk/oracle.hpp"
#include "primwalk/report.hpp"
#include "primwalk/torus.hpp"
#include "primwalk/walk.hpp"

namespace py = pybind11;
using namespace primwalk;

namespace {

py::dict point_counts_to_dict(const std::map<LatticePoint, std::uint64_t>& counts) {
    py::dict out;
    for (const auto& [point, count] : counts) out[py::tuple(py::cast(point))] = count;
    return out;
}

py::dict exact_mass_to_dict(const ExactDistribution& dist) {
    py::dict out;
    for (const auto& [point, mass] : dist.mass) out[py::tuple(py::cast(point))] = mass;
    return out;
}

} // namespace

PYBIND11_MODULE(_primwalk, m) {
    m.doc() = "random walks on primitive lattice points";
    m.attr("__version__") = kVersion;

    py::register_exception<OverflowError>(m, "CoordinateOverflowError", PyExc_OverflowError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<SearchLimitError>(m, "SearchLimitError", PyExc_RuntimeError);

    py::class_<Rational>(m, "Rational")
        .def("num_str", [](const Rational& r) { return Rational::int_to_string(r.num()); })
        .def("den_str", [](const Rational& r) { return Rational::int_to_string(r.den()); })
        .def("to_double", &Rational::to_double)
        .def("__float__", &Rational::to_double)
        .def("__str__", &Rational::str)
        .def("__repr__", [](const Rational& r) { return "Rational(" + r.str() + ")"; })
        .def("__eq__", [](const Rational& a, const Rational& b) { return a == b; })
        .def("__lt__", [](const Rational& a, const Rational& b) { return a < b; });

    py::class_<RandomStream>(m, "RandomStream")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next", &RandomStream::next)
        .def("bounded", &RandomStream::bounded, py::arg("n"))
        .def("uniform01", &RandomStream::uniform01);
    m.def("derive_stream", &derive_stream, py::arg("master"), py::arg("index"));

    // lattice -----------------------------------------------------------
    m.def("gcd_vec", &gcd_vec, py::arg("z"));
    m.def("normalize", &normalize, py::arg("z"));
    m.def("is_primitive", &is_primitive, py::arg("z"));
    m.def("is_coprime_to", &is_coprime_to, py::arg("z"), py::arg("k"));
    m.def("hat_plus", &hat_plus, py::arg("a"), py::arg("z"));
    m.def(
        "hat_plus_k",
        [](const LatticePoint& a, const LatticePoint& z, std::uint64_t k) {
            const auto r = hat_plus_k(a, z, k);
            return py::make_tuple(r.point, r.power);
        },
        py::arg("a"), py::arg("z"), py::arg("k"));

    py::class_<WalkMode>(m, "WalkMode")
        .def_static("full_gcd", &WalkMode::full_gcd)
        .def_static("coprime_to", &WalkMode::coprime_to, py::arg("k"))
        .def("is_full", &WalkMode::is_full)
        .def("k", &WalkMode::k)
        .def("valid_state", &WalkMode::valid_state, py::arg("z"))
        .def("label", &WalkMode::label)
        .def("__repr__", [](const WalkMode& mode) { return "WalkMode(" + mode.label() + ")"; });

    m.def("step", &step, py::arg("mode"), py::arg("a"), py::arg("z"));

    py::class_<NonActionWitness>(m, "NonActionWitness")
        .def_readonly("a1", &NonActionWitness::a1)
        .def_readonly("a2", &NonActionWitness::a2)
        .def_readonly("z", &NonActionWitness::z)
        .def_readonly("sequential", &NonActionWitness::sequential)
        .def_readonly("combined", &NonActionWitness::combined);
    m.def("non_action_witness", &non_action_witness, py::arg("d"), py::arg("bound"));

    m.def("connect_to_zero", &connect_to_zero, py::arg("x"),
          py::arg("prime_search_limit") = 1000000);
    m.def("replay_path", &replay_path, py::arg("steps"), py::arg("d"));

    // measures ----------------------------------------------------------
    py::enum_<NormKind>(m, "NormKind")
        .value("L1", NormKind::L1)
        .value("L2", NormKind::L2)
        .value("Linf", NormKind::Linf);
    m.def("norm_value", &norm_value, py::arg("z"), py::arg("norm"));

    py::class_<StepDistribution>(m, "StepDistribution")
        .def(py::init([](const std::vector<std::pair<LatticePoint, std::uint64_t>>& support,
                         std::uint64_t denominator) {
                 std::vector<WeightedPoint> wps;
                 for (const auto& [point, weight] : support) wps.push_back({point, weight});
                 StepDistribution mu(std::move(wps), denominator);
                 mu.validate_or_throw();
                 return mu;
             }),
             py::arg("support"), py::arg("denominator"))
        .def("support",
             [](const StepDistribution& mu) {
                 std::vector<std::pair<LatticePoint, std::uint64_t>> out;
                 for (const auto& wp : mu.support()) out.emplace_back(wp.point, wp.weight);
                 return out;
             })
        .def("denominator", &StepDistribution::denominator)
        .def("dim", &StepDistribution::dim)
        .def("validate", &StepDistribution::validate)
        .def("sample", &StepDistribution::sample, py::arg("stream"));

    m.def("eta1", &eta1);
    m.def("eta2", &eta2);
    m.def("eta3", &eta3);
    m.def("nu", &nu, py::arg("d"));
    m.def("dirac", &dirac, py::arg("z"));
    m.def("named_measure", &named_measure, py::arg("name"), py::arg("d") = 2);

    m.def("first_moment", &first_moment, py::arg("mu"), py::arg("norm") = NormKind::L2);
    m.def("first_moment_exact", &first_moment_exact, py::arg("mu"), py::arg("norm"));
    m.def(
        "generation_check",
        [](const StepDistribution& mu) {
            const auto res = generation_check(mu);
            return py::make_tuple(verdict_name(res.verdict), res.detail);
        },
        py::arg("mu"));
    m.def("torus_coverage_check", &torus_coverage_check, py::arg("mu"), py::arg("k"));

    // torus walk --------------------------------------------------------
    m.def("plain_walk", &plain_walk, py::arg("mu"), py::arg("z"), py::arg("n"),
          py::arg("stream"));
    m.def(
        "count_Y",
        [](const std::vector<LatticePoint>& path, std::uint64_t k) {
            return count_Y(std::span(path.data(), path.size()), k);
        },
        py::arg("path"), py::arg("k"));
    m.def(
        "indicator_M",
        [](const std::vector<LatticePoint>& path, std::uint64_t k) {
            return indicator_M(std::span(path.data(), path.size()), k);
        },
        py::arg("path"), py::arg("k"));
    m.def("uniform_min_U", &uniform_min_U, py::arg("prefix"), py::arg("k"));

    py::class_<TorusCalibration>(m, "TorusCalibration")
        .def_readonly("k", &TorusCalibration::k)
        .def_readonly("n0", &TorusCalibration::n0)
        .def_readonly("covering_word", &TorusCalibration::covering_word)
        .def_readonly("cylinder_bound", &TorusCalibration::cylinder_bound)
        .def_readonly("cylinder_bound_exact", &TorusCalibration::cylinder_bound_exact)
        .def_readonly("log_cylinder_bound", &TorusCalibration::log_cylinder_bound)
        .def_readonly("alpha_hat", &TorusCalibration::alpha_hat)
        .def_readonly("alpha_ci_lo", &TorusCalibration::alpha_ci_lo)
        .def_readonly("alpha_ci_hi", &TorusCalibration::alpha_ci_hi);
    m.def("find_covering_word", &find_covering_word, py::arg("mu"), py::arg("k"),
          py::arg("max_len") = 4096);

    py::class_<EUEstimate>(m, "EUEstimate")
        .def_readonly("mean", &EUEstimate::mean)
        .def_readonly("ci_lo", &EUEstimate::ci_lo)
        .def_readonly("ci_hi", &EUEstimate::ci_hi)
        .def_readonly("trials", &EUEstimate::trials);
    m.def("estimate_EU", &estimate_EU, py::arg("mu"), py::arg("k"), py::arg("n"),
          py::arg("trials"), py::arg("seed"), py::arg("threads") = 1);

    py::class_<ChernoffRow>(m, "ChernoffRow")
        .def_readonly("n", &ChernoffRow::n)
        .def_readonly("threshold", &ChernoffRow::threshold)
        .def_readonly("empirical_tail", &ChernoffRow::empirical_tail)
        .def_readonly("bound", &ChernoffRow::bound)
        .def_readonly("trials", &ChernoffRow::trials);
    m.def("chernoff_experiment", &chernoff_experiment, py::arg("mu"), py::arg("k"),
          py::arg("z"), py::arg("n_grid"), py::arg("epsilon"), py::arg("trials"),
          py::arg("seed"), py::arg("calibration"), py::arg("threads") = 1);
    m.def("enumerate_EU", &enumerate_EU, py::arg("mu"), py::arg("k"), py::arg("n"));
    m.def("enumerate_tail_probability", &enumerate_tail_probability, py::arg("mu"),
          py::arg("k"), py::arg("z"), py::arg("n"), py::arg("threshold"));

    // walk engine -------------------------------------------------------
    py::class_<WalkConfig>(m, "WalkConfig")
        .def(py::init<>())
        .def_readwrite("mode", &WalkConfig::mode)
        .def_readwrite("z0", &WalkConfig::z0)
        .def_readwrite("steps", &WalkConfig::steps)
        .def_readwrite("trials", &WalkConfig::trials)
        .def_readwrite("seed", &WalkConfig::seed)
        .def_readwrite("norm", &WalkConfig::norm);

    py::class_<TrajectoryStats>(m, "TrajectoryStats")
        .def_readonly("norm_histogram", &TrajectoryStats::norm_histogram)
        .def_readonly("bin_width", &TrajectoryStats::bin_width)
        .def_readonly("division_events", &TrajectoryStats::division_events)
        .def_readonly("divisor_histogram", &TrajectoryStats::divisor_histogram)
        .def_property_readonly(
            "occupation",
            [](const TrajectoryStats& stats) { return point_counts_to_dict(stats.occupation); })
        .def_readonly("occupation_capped", &TrajectoryStats::occupation_capped)
        .def_readonly("max_norm", &TrajectoryStats::max_norm)
        .def_readonly("final_state", &TrajectoryStats::final_state)
        .def_readonly("steps", &TrajectoryStats::steps);
    m.def("run_walk", &run_walk, py::arg("mu"), py::arg("config"), py::arg("bin_width") = 1.0,
          py::arg("occupation_cap") = 1000000);

    py::class_<EmpiricalDistribution>(m, "EmpiricalDistribution")
        .def_property_readonly(
            "counts",
            [](const EmpiricalDistribution& dist) { return point_counts_to_dict(dist.counts); })
        .def_readonly("total", &EmpiricalDistribution::total)
        .def("probability", &EmpiricalDistribution::probability, py::arg("z"));
    m.def("endpoint_distribution", &endpoint_distribution, py::arg("mu"), py::arg("config"),
          py::arg("n"), py::arg("threads") = 1);

    py::enum_<CesaroEstimator>(m, "CesaroEstimator")
        .value("PooledEndpoints", CesaroEstimator::PooledEndpoints)
        .value("Occupation", CesaroEstimator::Occupation);
    m.def("cesaro_distribution", &cesaro_distribution, py::arg("mu"), py::arg("config"),
          py::arg("n"), py::arg("estimator"), py::arg("threads") = 1);
    m.def("tv_distance", &tv_distance, py::arg("a"), py::arg("b"));

    py::class_<ReturnStats>(m, "ReturnStats")
        .def_readonly("completed_histogram", &ReturnStats::completed_histogram)
        .def_readonly("completed", &ReturnStats::completed)
        .def_readonly("censored", &ReturnStats::censored)
        .def_readonly("cap", &ReturnStats::cap)
        .def_readonly("tau_hat", &ReturnStats::tau_hat)
        .def_readonly("tau_se", &ReturnStats::tau_se)
        .def_readonly("censored_warning", &ReturnStats::censored_warning)
        .def("censored_fraction", &ReturnStats::censored_fraction);
    m.def("estimate_return_time", &estimate_return_time, py::arg("mu"), py::arg("config"),
          py::arg("cap"), py::arg("threads") = 1);

    py::class_<KacCheckResult>(m, "KacCheckResult")
        .def_readonly("omega_hat", &KacCheckResult::omega_hat)
        .def_readonly("tau_hat", &KacCheckResult::tau_hat)
        .def_readonly("ratio", &KacCheckResult::ratio)
        .def_readonly("ci_lo", &KacCheckResult::ci_lo)
        .def_readonly("ci_hi", &KacCheckResult::ci_hi)
        .def_readonly("occupation_steps", &KacCheckResult::occupation_steps)
        .def_readonly("excursions_completed", &KacCheckResult::excursions_completed)
        .def_readonly("censored_fraction", &KacCheckResult::censored_fraction);
    m.def("kac_check", &kac_check, py::arg("mu"), py::arg("config"), py::arg("cap"),
          py::arg("threads") = 1);

    py::class_<DriftCell>(m, "DriftCell")
        .def_readonly("n", &DriftCell::n)
        .def_readonly("mean", &DriftCell::mean)
        .def_readonly("ci_lo", &DriftCell::ci_lo)
        .def_readonly("ci_hi", &DriftCell::ci_hi);
    py::class_<DriftRow>(m, "DriftRow")
        .def_readonly("z", &DriftRow::z)
        .def_readonly("norm", &DriftRow::norm)
        .def_readonly("large", &DriftRow::large)
        .def_readonly("cells", &DriftRow::cells);
    py::class_<DriftReport>(m, "DriftReport")
        .def_readonly("contraction_found", &DriftReport::contraction_found)
        .def_readonly("c_hat", &DriftReport::c_hat)
        .def_readonly("m_hat", &DriftReport::m_hat)
        .def_readonly("m_prime", &DriftReport::m_prime)
        .def_readonly("n0_prime", &DriftReport::n0_prime)
        .def_readonly("kappa", &DriftReport::kappa)
        .def_readonly("rows", &DriftReport::rows);
    m.def("drift_estimate", &drift_estimate, py::arg("mu"), py::arg("mode"),
          py::arg("z_samples"), py::arg("n_grid"), py::arg("trials"), py::arg("seed"),
          py::arg("norm") = NormKind::L2, py::arg("threads") = 1);

    py::class_<RecurrenceReport>(m, "RecurrenceReport")
        .def_readonly("epsilon", &RecurrenceReport::epsilon)
        .def_readonly("m_prime", &RecurrenceReport::m_prime)
        .def_readonly("radius", &RecurrenceReport::radius)
        .def_readonly("mass_by_n", &RecurrenceReport::mass_by_n)
        .def_readonly("n_z", &RecurrenceReport::n_z);
    m.def("recurrence_mass", &recurrence_mass, py::arg("mu"), py::arg("config"),
          py::arg("epsilon"), py::arg("m_prime"), py::arg("n_grid"), py::arg("threads") = 1);

    // exact oracle ------------------------------------------------------
    py::class_<ExactDistribution>(m, "ExactDistribution")
        .def_static("dirac", &ExactDistribution::dirac, py::arg("z"))
        .def_property_readonly("mass", &exact_mass_to_dict)
        .def("total", &ExactDistribution::total)
        .def("at", &ExactDistribution::at, py::arg("z"));
    m.def("propagate", &propagate, py::arg("dist"), py::arg("mu"), py::arg("mode"));
    m.def("exact_endpoint", &exact_endpoint, py::arg("z"), py::arg("mu"), py::arg("mode"),
          py::arg("n"), py::arg("support_cap") = 4000000);

    py::enum_<BoundaryPolicy>(m, "BoundaryPolicy")
        .value("Substochastic", BoundaryPolicy::Substochastic)
        .value("Reflecting", BoundaryPolicy::Reflecting);

    py::class_<TruncatedChain>(m, "TruncatedChain")
        .def_readonly("radius", &TruncatedChain::radius)
        .def_readonly("states", &TruncatedChain::states)
        .def("dim", &TruncatedChain::dim)
        .def("index_of", &TruncatedChain::index_of, py::arg("z"))
        .def("row_sum", &TruncatedChain::row_sum, py::arg("state"))
        .def("deficit", &TruncatedChain::deficit, py::arg("state"))
        .def("rows",
             [](const TruncatedChain& chain, std::size_t state) {
                 std::vector<std::pair<std::uint32_t, std::uint64_t>> out = chain.rows[state];
                 return out;
             })
        .def_readonly("denom", &TruncatedChain::denom);
    m.def("build_truncated_chain", &build_truncated_chain, py::arg("mu"), py::arg("mode"),
          py::arg("radius"), py::arg("policy"), py::arg("state_cap") = 2000000);

    py::class_<StationaryResult>(m, "StationaryResult")
        .def_property_readonly(
            "pi",
            [](const StationaryResult& res) {
                return std::vector<double>(res.pi.begin(), res.pi.end());
            })
        .def_property_readonly(
            "residual",
            [](const StationaryResult& res) { return static_cast<double>(res.residual); })
        .def_readonly("iterations", &StationaryResult::iterations);
    m.def(
        "stationary_cesaro",
        [](const TruncatedChain& chain, const LatticePoint& z0, std::uint64_t max_iters,
           double tol) { return stationary_cesaro(chain, z0, max_iters, tol); },
        py::arg("chain"), py::arg("z0"), py::arg("max_iters") = 1000000,
        py::arg("tol") = 1e-10);

    py::class_<ReturnTimeResult>(m, "ReturnTimeResult")
        .def_property_readonly(
            "value",
            [](const ReturnTimeResult& res) { return static_cast<double>(res.value); })
        .def_property_readonly(
            "residual",
            [](const ReturnTimeResult& res) { return static_cast<double>(res.residual); })
        .def_readonly("sweeps", &ReturnTimeResult::sweeps);
    m.def(
        "expected_return_time",
        [](const TruncatedChain& chain, const LatticePoint& z0, std::uint64_t max_sweeps,
           double tol) { return expected_return_time(chain, z0, max_sweeps, tol); },
        py::arg("chain"), py::arg("z0"), py::arg("max_sweeps") = 1000000,
        py::arg("tol") = 1e-15);

    py::class_<SccResult>(m, "SccResult")
        .def_readonly("component", &SccResult::component)
        .def_readonly("count", &SccResult::count)
        .def_readonly("closed_count", &SccResult::closed_count)
        .def_readonly("single_scc", &SccResult::single_scc)
        .def_readonly("irreducible", &SccResult::irreducible);
    m.def("irreducibility_scc", &irreducibility_scc, py::arg("chain"));

    py::class_<ConeCheckResult>(m, "ConeCheckResult")
        .def_readonly("mass_full", &ConeCheckResult::mass_full)
        .def_readonly("mass_k", &ConeCheckResult::mass_k)
        .def_readonly("violated", &ConeCheckResult::violated);
    m.def("cone_monotonicity_check", &cone_monotonicity_check, py::arg("z"), py::arg("mu"),
          py::arg("n"), py::arg("cone_base"), py::arg("k"), py::arg("support_cap") = 4000000);
}

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hoskip/experiment.hpp"
#include "hoskip/version.hpp"

namespace py = pybind11;
using namespace hoskip;

PYBIND11_MODULE(_hoskip, m) {
  m.doc() = "Monte Carlo simulator for handover skipping in dense downlink "
            "cellular networks";
  m.attr("__version__") = kVersion;

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("fork", &Rng::fork, py::arg("k0"), py::arg("k1") = 0)
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("exponential", &Rng::exponential)
      .def("normal", &Rng::normal)
      .def("poisson", &Rng::poisson, py::arg("mean"))
      .def_property_readonly("seed", &Rng::seed);

  py::class_<Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y)
      .def("__repr__", [](const Point& p) {
        std::ostringstream os;
        os << "Point(" << p.x << ", " << p.y << ")";
        return os.str();
      });

  py::class_<Window>(m, "Window")
      .def(py::init<double, double, double, double, double>(),
           py::arg("x_min"), py::arg("x_max"), py::arg("y_min"),
           py::arg("y_max"), py::arg("guard") = 0.0)
      .def_static("square", &Window::square, py::arg("side_km"),
                  py::arg("guard_km") = 0.0)
      .def_readwrite("x_min", &Window::x_min)
      .def_readwrite("x_max", &Window::x_max)
      .def_readwrite("y_min", &Window::y_min)
      .def_readwrite("y_max", &Window::y_max)
      .def_readwrite("guard", &Window::guard)
      .def("area", &Window::area)
      .def("inner_area", &Window::inner_area)
      .def("contains", &Window::contains)
      .def("inner_contains", &Window::inner_contains)
      .def("validate", &Window::validate);

  py::class_<BaseStation>(m, "BaseStation")
      .def(py::init<>())
      .def_readwrite("id", &BaseStation::id)
      .def_readwrite("position", &BaseStation::position)
      .def_readwrite("tier", &BaseStation::tier)
      .def_readwrite("power", &BaseStation::power)
      .def_readwrite("path_loss_exp", &BaseStation::path_loss_exp);

  py::enum_<ModelTag>(m, "ModelTag")
      .value("Ppp", ModelTag::Ppp)
      .value("MaternPcp", ModelTag::MaternPcp);

  py::class_<PcpParams>(m, "PcpParams")
      .def(py::init<>())
      .def_readwrite("lambda_p", &PcpParams::lambda_p)
      .def_readwrite("lambda_c", &PcpParams::lambda_c)
      .def_readwrite("radius", &PcpParams::radius)
      .def_readwrite("p1", &PcpParams::p1)
      .def_readwrite("p2", &PcpParams::p2)
      .def_readwrite("eta1", &PcpParams::eta1)
      .def_readwrite("eta2", &PcpParams::eta2)
      .def("total_intensity", &PcpParams::total_intensity)
      .def("validate", &PcpParams::validate);

  py::class_<Deployment>(m, "Deployment")
      .def(py::init<std::vector<BaseStation>, Window, ModelTag, std::uint64_t,
                    int>(),
           py::arg("stations"), py::arg("window"), py::arg("tag"),
           py::arg("seed"), py::arg("resample_count") = 0)
      .def_property_readonly("stations", &Deployment::stations)
      .def_property_readonly("window", &Deployment::window)
      .def_property_readonly("model_tag", &Deployment::model_tag)
      .def_property_readonly("seed", &Deployment::seed)
      .def_property_readonly("resample_count", &Deployment::resample_count)
      .def("__len__", &Deployment::size)
      .def("empirical_intensity", &Deployment::empirical_intensity)
      .def("inner_intensity", &Deployment::inner_intensity)
      .def("serving_index", &Deployment::serving_index, py::arg("point"))
      .def("serving_station", &Deployment::serving_station, py::arg("point"),
           py::return_value_policy::copy)
      .def("to_csv",
           [](const Deployment& d) {
             std::ostringstream os;
             d.write_csv(os);
             return os.str();
           })
      .def_static("from_csv",
                  [](const std::string& text, Window w, ModelTag tag,
                     std::uint64_t seed) {
                    std::istringstream is(text);
                    return Deployment::read_csv(is, w, tag, seed);
                  });

  m.def("sample_ppp", &sample_ppp, py::arg("lam"), py::arg("window"),
        py::arg("seed"), py::arg("power") = 1.0,
        py::arg("path_loss_exp") = 4.0);
  m.def("sample_matern_pcp", &sample_matern_pcp, py::arg("params"),
        py::arg("window"), py::arg("seed"));

  py::class_<CellAreaEstimate>(m, "CellAreaEstimate")
      .def_readonly("area_km2", &CellAreaEstimate::area_km2)
      .def_readonly("rel_std_err", &CellAreaEstimate::rel_std_err)
      .def_readonly("unbounded", &CellAreaEstimate::unbounded);
  m.def("cell_area", &cell_area, py::arg("bs"), py::arg("deployment"),
        py::arg("n_probe"), py::arg("rng"));

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<>())
      .def_readwrite("origin", &Trajectory::origin)
      .def_readwrite("direction", &Trajectory::direction)
      .def_readwrite("length_km", &Trajectory::length_km)
      .def_readwrite("velocity_kmh", &Trajectory::velocity_kmh)
      .def("at", &Trajectory::at, py::arg("s"))
      .def("endpoint", &Trajectory::endpoint)
      .def("validate", &Trajectory::validate);

  py::class_<CellVisit>(m, "CellVisit")
      .def_readonly("bs_id", &CellVisit::bs_id)
      .def_readonly("s_entry", &CellVisit::s_entry)
      .def_readonly("s_exit", &CellVisit::s_exit);

  py::class_<VisitSequence>(m, "VisitSequence")
      .def_readonly("visits", &VisitSequence::visits)
      .def_readonly("length_km", &VisitSequence::length_km)
      .def_readonly("merged_slivers", &VisitSequence::merged_slivers)
      .def("handovers", &VisitSequence::handovers)
      .def("to_csv", [](const VisitSequence& v) {
        std::ostringstream os;
        v.write_csv(os);
        return os.str();
      });

  m.def("extract_visits", &extract_visits, py::arg("trajectory"),
        py::arg("deployment"), py::arg("step_km"), py::arg("tol_km"));
  m.def("min_distance_in_visit", &min_distance_in_visit, py::arg("trajectory"),
        py::arg("visit"), py::arg("bs"));

  py::class_<FadingOverride>(m, "FadingOverride")
      .def(py::init<>())
      .def_readwrite("h", &FadingOverride::h)
      .def_readwrite("g_serving", &FadingOverride::g_serving)
      .def_readwrite("g_target", &FadingOverride::g_target);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("noise_power", &ChannelParams::noise_power)
      .def_readwrite("forced", &ChannelParams::forced);

  py::enum_<ServiceTag>(m, "ServiceTag")
      .value("BestConnected", ServiceTag::BestConnected)
      .value("Blackout", ServiceTag::Blackout)
      .value("BlackoutComp", ServiceTag::BlackoutComp);

  py::class_<ServiceMode>(m, "ServiceMode")
      .def(py::init<>())
      .def_readwrite("tag", &ServiceMode::tag)
      .def_readwrite("serving_id", &ServiceMode::serving_id)
      .def_readwrite("target_id", &ServiceMode::target_id)
      .def_readwrite("skipped_id", &ServiceMode::skipped_id)
      .def_readwrite("ic", &ServiceMode::ic)
      .def("validate", &ServiceMode::validate);

  py::class_<SinrSample>(m, "SinrSample")
      .def_readonly("sinr", &SinrSample::sinr)
      .def_readonly("interference_free", &SinrSample::interference_free);

  m.def("sinr_best_connected", &sinr_best_connected, py::arg("point"),
        py::arg("deployment"), py::arg("channel"), py::arg("rng"));
  m.def("sinr_blackout_ic", &sinr_blackout_ic, py::arg("point"),
        py::arg("mode"), py::arg("deployment"), py::arg("channel"),
        py::arg("rng"));
  m.def("sinr_blackout_comp", &sinr_blackout_comp, py::arg("point"),
        py::arg("mode"), py::arg("deployment"), py::arg("channel"),
        py::arg("rng"));
  m.def("evaluate_sinr", &evaluate_sinr, py::arg("point"), py::arg("mode"),
        py::arg("deployment"), py::arg("channel"), py::arg("rng"));

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("BestConnected", PolicyKind::BestConnected)
      .value("Alternating", PolicyKind::Alternating)
      .value("LocationAware", PolicyKind::LocationAware)
      .value("SizeAware", PolicyKind::SizeAware)
      .value("Hybrid", PolicyKind::Hybrid);

  py::class_<PolicyConfig>(m, "PolicyConfig")
      .def(py::init<>())
      .def_readwrite("kind", &PolicyConfig::kind)
      .def_readwrite("name", &PolicyConfig::name)
      .def_readwrite("min_dist_threshold_km",
                     &PolicyConfig::min_dist_threshold_km)
      .def_readwrite("area_threshold_km2", &PolicyConfig::area_threshold_km2)
      .def_readwrite("ic_enabled", &PolicyConfig::ic_enabled)
      .def_readwrite("comp_enabled", &PolicyConfig::comp_enabled)
      .def_readwrite("area_probe_count", &PolicyConfig::area_probe_count)
      .def("validate", &PolicyConfig::validate);

  m.def("decide_skips",
        [](const VisitSequence& visits, const Trajectory& traj,
           const Deployment& dep, const PolicyConfig& config, const Rng& rng) {
          return decide_skips(visits, traj, dep, config, rng);
        },
        py::arg("visits"), py::arg("trajectory"), py::arg("deployment"),
        py::arg("config"), py::arg("rng"));

  py::class_<ServiceSegment>(m, "ServiceSegment")
      .def_readonly("s_start", &ServiceSegment::s_start)
      .def_readonly("s_end", &ServiceSegment::s_end)
      .def_readonly("mode", &ServiceSegment::mode);

  py::class_<ServiceSchedule>(m, "ServiceSchedule")
      .def_readonly("segments", &ServiceSchedule::segments)
      .def_readonly("ho_count", &ServiceSchedule::ho_count)
      .def_readonly("skip_count", &ServiceSchedule::skip_count)
      .def("segment_at", &ServiceSchedule::segment_at, py::arg("s"),
           py::return_value_policy::copy)
      .def("to_csv", [](const ServiceSchedule& s) {
        std::ostringstream os;
        s.write_csv(os);
        return os.str();
      });

  m.def("build_schedule", &build_schedule, py::arg("visits"),
        py::arg("skip_flags"), py::arg("config"));

  py::class_<RateEstimate>(m, "RateEstimate")
      .def_readonly("mean", &RateEstimate::mean)
      .def_readonly("std_err", &RateEstimate::std_err)
      .def_readonly("n", &RateEstimate::n);

  py::class_<CoverageCurve>(m, "CoverageCurve")
      .def_readonly("threshold", &CoverageCurve::threshold)
      .def_readonly("probability", &CoverageCurve::probability)
      .def_readonly("ci_halfwidth", &CoverageCurve::ci_halfwidth)
      .def_readonly("n_samples", &CoverageCurve::n_samples);

  m.def("estimate_coverage",
        [](const ServiceSchedule& s, const Trajectory& t, const Deployment& d,
           const ChannelParams& c, const std::vector<double>& thresholds,
           int n_samples, const Rng& rng) {
          return estimate_coverage(s, t, d, c, thresholds, n_samples, rng);
        },
        py::arg("schedule"), py::arg("trajectory"), py::arg("deployment"),
        py::arg("channel"), py::arg("thresholds_linear"), py::arg("n_samples"),
        py::arg("rng"));
  m.def("estimate_spectral_efficiency", &estimate_spectral_efficiency,
        py::arg("schedule"), py::arg("trajectory"), py::arg("deployment"),
        py::arg("channel"), py::arg("n_samples"), py::arg("rng"));

  m.def("analytic_ho_rate", &analytic_ho_rate, py::arg("lambda_per_km2"),
        py::arg("velocity_kmh"));
  m.def("ho_cost", &ho_cost, py::arg("ho_per_km"), py::arg("velocity_kmh"),
        py::arg("delay_s"));
  m.def("throughput", &throughput, py::arg("spectral_eff"),
        py::arg("ho_cost"), py::arg("bandwidth_hz"));
  m.def("db_to_linear", &db_to_linear);
  m.def("linear_to_db", &linear_to_db);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("tag", &ModelConfig::tag)
      .def_readwrite("lam", &ModelConfig::lambda)
      .def_readwrite("power", &ModelConfig::power)
      .def_readwrite("path_loss_exp", &ModelConfig::path_loss_exp)
      .def_readwrite("pcp", &ModelConfig::pcp)
      .def("effective_intensity", &ModelConfig::effective_intensity);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("model", &ScenarioConfig::model)
      .def_readwrite("window_side_km", &ScenarioConfig::window_side_km)
      .def_readwrite("guard_km", &ScenarioConfig::guard_km)
      .def_readwrite("noise_power", &ScenarioConfig::noise_power)
      .def_readwrite("trajectory_len_km", &ScenarioConfig::trajectory_len_km)
      .def_readwrite("step_km", &ScenarioConfig::step_km)
      .def_readwrite("tol_km", &ScenarioConfig::tol_km)
      .def_readwrite("policies", &ScenarioConfig::policies)
      .def_readwrite("velocities_kmh", &ScenarioConfig::velocities_kmh)
      .def_readwrite("ho_delay_s", &ScenarioConfig::ho_delay_s)
      .def_readwrite("bandwidth_hz", &ScenarioConfig::bandwidth_hz)
      .def_readwrite("thresholds_db", &ScenarioConfig::thresholds_db)
      .def_readwrite("n_replications", &ScenarioConfig::n_replications)
      .def_readwrite("rate_samples_per_rep",
                     &ScenarioConfig::rate_samples_per_rep)
      .def_readwrite("coverage_samples_per_rep",
                     &ScenarioConfig::coverage_samples_per_rep)
      .def_readwrite("area_probe_count", &ScenarioConfig::area_probe_count)
      .def_readwrite("master_seed", &ScenarioConfig::master_seed)
      .def_readwrite("threads", &ScenarioConfig::threads)
      .def("validate", &ScenarioConfig::validate)
      .def("apply_fast_mode", &ScenarioConfig::apply_fast_mode);

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("scheme", &MetricsReport::scheme)
      .def_readonly("velocity_kmh", &MetricsReport::velocity_kmh)
      .def_readonly("spectral_eff", &MetricsReport::spectral_eff)
      .def_readonly("spectral_eff_se", &MetricsReport::spectral_eff_se)
      .def_readonly("ho_per_km", &MetricsReport::ho_per_km)
      .def_readonly("ho_per_s", &MetricsReport::ho_per_s)
      .def_readonly("cost", &MetricsReport::cost)
      .def_readonly("throughput_nats_s", &MetricsReport::throughput_nats_s)
      .def_readonly("throughput_ci", &MetricsReport::throughput_ci);

  py::class_<SchemeResult>(m, "SchemeResult")
      .def_readonly("policy", &SchemeResult::policy)
      .def_readonly("rate", &SchemeResult::rate)
      .def_readonly("ho_per_km", &SchemeResult::ho_per_km)
      .def_readonly("ho_per_km_se", &SchemeResult::ho_per_km_se)
      .def_readonly("skip_fraction", &SchemeResult::skip_fraction)
      .def_readonly("blackout_fraction", &SchemeResult::blackout_fraction)
      .def_readonly("coverage", &SchemeResult::coverage)
      .def("report_at", &SchemeResult::report_at, py::arg("velocity_kmh"),
           py::arg("delay_s"), py::arg("bandwidth_hz"));

  py::class_<ScenarioResult>(m, "ScenarioResult")
      .def_readonly("config", &ScenarioResult::config)
      .def_readonly("schemes", &ScenarioResult::schemes)
      .def_readonly("total_trajectory_km", &ScenarioResult::total_trajectory_km)
      .def_readonly("deployment_resamples",
                    &ScenarioResult::deployment_resamples)
      .def_readonly("sliver_merges", &ScenarioResult::sliver_merges)
      .def_readonly("replication_seeds", &ScenarioResult::replication_seeds)
      .def_readonly("wall_seconds", &ScenarioResult::wall_seconds)
      .def("scheme", &ScenarioResult::scheme, py::arg("name"),
           py::return_value_policy::copy);

  m.def("run_scenario", &run_scenario, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("write_scenario_outputs", &write_scenario_outputs, py::arg("result"),
        py::arg("out_dir"));
  m.def("load_config", &load_config, py::arg("file"));
  m.def("apply_override", &apply_override, py::arg("config"),
        py::arg("assignment"));
  m.def("config_digest", &config_digest, py::arg("config"));

  py::class_<CalibrationTarget>(m, "CalibrationTarget")
      .def(py::init<>())
      .def_readwrite("rate", &CalibrationTarget::rate)
      .def_readwrite("skip_fraction", &CalibrationTarget::skip_fraction)
      .def_readwrite("tolerance", &CalibrationTarget::tolerance);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("threshold", &CalibrationResult::threshold)
      .def_readonly("achieved", &CalibrationResult::achieved)
      .def_readonly("evaluations", &CalibrationResult::evaluations)
      .def_readonly("converged", &CalibrationResult::converged);

  m.def("calibrate_threshold", &calibrate_threshold, py::arg("base"),
        py::arg("policy"), py::arg("target"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("pass_", &CheckResult::pass)
      .def_readonly("detail", &CheckResult::detail);

  py::class_<ReproOutcome>(m, "ReproOutcome")
      .def_readonly("files", &ReproOutcome::files)
      .def_readonly("checks", &ReproOutcome::checks);

  m.def("reproduce",
        [](const std::string& id, const std::filesystem::path& out,
           bool fast) { return reproduce(parse_repro_id(id), out, fast); },
        py::arg("id"), py::arg("out_dir"), py::arg("fast") = false,
        py::call_guard<py::gil_scoped_release>());

  m.def("single_tier_base_config", &single_tier_base_config);
  m.def("two_tier_base_config", &two_tier_base_config);
  m.def("crossover_velocity", &crossover_velocity, py::arg("rate_a"),
        py::arg("ho_per_km_a"), py::arg("rate_b"), py::arg("ho_per_km_b"),
        py::arg("delay_s"), py::arg("v_lo"), py::arg("v_hi"));
  m.def("ppp_coverage_closed_form_eta4", &ppp_coverage_closed_form_eta4,
        py::arg("threshold_linear"));
}

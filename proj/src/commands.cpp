#include "tomomotion/commands.hpp"

#include <ostream>

#include "tomomotion/estimator.hpp"
#include "tomomotion/run_config.hpp"
#include "tomomotion/stack_io.hpp"

namespace tomomotion {

namespace fs = std::filesystem;

int cmd_simulate(const fs::path& config, const fs::path& out_dir, std::ostream& log) {
  const RunConfig cfg = load_run_config(config);
  const auto phantom = cfg.phantom.build();
  const MotionGroundTruth motion = build_motion(cfg);
  RenderOptions options;
  options.ray_step = cfg.geometry.ray_step;
  options.ray_half_extent = cfg.geometry.ray_half_extent;
  const double step = options.ray_step > 0.0 ? options.ray_step : cfg.geometry.spacing;
  const PhantomMoments moments = phantom_moments(*phantom, step);
  ProjectionStack stack =
      render_stack(*phantom, motion, cfg.geometry.frame_geometry(), options, moments);

  write_stack(stack, out_dir);
  write_truth_csv(truth_table(motion, moments.center), out_dir / kTruthFile);
  write_file_atomic(out_dir / kConfigFile, to_json(cfg).dump(2) + "\n");
  log << "simulate: " << stack.size() << " frames of " << stack.geometry.n1 << "x"
      << stack.geometry.n2 << " written to " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_estimate(const fs::path& stack_dir, const std::optional<fs::path>& truth,
                 const fs::path& out, const std::optional<fs::path>& config, std::ostream& log) {
  auto stack = std::make_shared<const ProjectionStack>(read_stack(stack_dir));
  EstimatorConfig cfg;
  if (config) {
    cfg = load_run_config(*config).estimator;
  } else if (fs::exists(stack_dir / kConfigFile)) {
    cfg = load_run_config(stack_dir / kConfigFile).estimator;
  }
  std::optional<Vec3> c3;
  if (truth) c3 = read_truth_csv(*truth).c3;

  const MotionEstimate est = estimate_motion(stack, cfg, c3);
  write_estimate_csv(est, out);
  std::size_t phi = 0;
  std::size_t alpha = 0;
  for (std::size_t l = 0; l < est.size(); ++l) {
    phi += est.phi[l].has_value();
    alpha += est.alpha[l].has_value();
  }
  log << "estimate: " << est.size() << " frames, phi on " << phi << ", alpha on " << alpha
      << (c3 ? "" : ", translation omitted (no C3)") << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, const std::optional<fs::path>& json_out,
               const VerifyOptions& options, std::ostream& log) {
  const VerifyReport report = run_verify(suite, options);
  for (const auto& c : report.checks) {
    log << (c.passed ? "PASS " : "FAIL ") << report.suite << "." << c.name << " = " << c.value
        << " (" << c.comparison << " " << c.threshold << ")\n";
  }
  if (json_out) write_file_atomic(*json_out, report.to_json().dump(2) + "\n");
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

int cmd_compare(const fs::path& estimate, const fs::path& truth, const fs::path& out,
                std::ostream& log) {
  const Comparison cmp = compare_estimate(read_estimate_csv(estimate), read_truth_csv(truth));
  write_comparison_csv(cmp, out);
  const auto line = [&](const char* name, const ErrorSummary& s) {
    log << name << ": n=" << s.count << " max=" << s.max << " median=" << s.median << "\n";
  };
  line("txy", cmp.txy);
  line("phi", cmp.phi);
  line("omega3", cmp.omega3);
  line("alpha", cmp.alpha);
  return kExitOk;
}

}  // namespace tomomotion

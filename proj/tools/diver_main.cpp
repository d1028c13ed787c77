#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "diver/hydrooptic.hpp"
#include "diver/image_io.hpp"
#include "diver/metrics.hpp"
#include "diver/optim.hpp"
#include "diver/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> collect_images(const std::string& input) {
  std::vector<std::string> out;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      for (auto& ch : ext) ch = static_cast<char>(::tolower(ch));
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
        out.push_back(entry.path().string());
    }
  } else if (fs::exists(input)) {
    out.push_back(input);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool parse_triple(const std::string& s, std::array<double, 3>& out) {
  std::istringstream ss(s);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',') && i < 3)
    out[static_cast<std::size_t>(i++)] = std::stod(tok);
  return i == 3;
}

void emit_report(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << text;
}

int cmd_enhance(const std::string& input, const std::string& output,
                const std::string& depth_dir, const std::string& config_path,
                const std::string& stages, bool metrics,
                const std::string& ref_dir, const std::string& patches,
                const std::string& report_path, std::uint64_t seed,
                bool joint, bool write_stages) {
  diver::Config cfg_file = config_path.empty()
                               ? diver::Config::parse("")
                               : diver::Config::parse_file(config_path);
  diver::PipelineConfig cfg = diver::make_pipeline_config(cfg_file);
  cfg.last_stage = diver::parse_stages(stages);
  cfg.seed = seed;
  cfg.joint = joint;
  cfg.depth_source = depth_dir.empty() ? diver::DepthSource::FallbackPrior
                                       : diver::DepthSource::Files;

  diver::RunOptions opts;
  opts.inputs = collect_images(input);
  if (opts.inputs.empty()) {
    std::cerr << "no input images under " << input << "\n";
    return 1;
  }
  opts.output_dir = output;
  opts.depth_dir = depth_dir;
  opts.ref_dir = ref_dir;
  opts.patches_path = patches;
  opts.compute_metrics = metrics || !ref_dir.empty() || !patches.empty();
  opts.write_stage_outputs = write_stages;

  const diver::RunManifest manifest = diver::run_pipeline(opts, cfg);
  emit_report(report_path, diver::format_report(manifest));

  int failures = 0;
  for (const auto& e : manifest.entries)
    if (!e.ok) {
      std::cerr << "skipped " << e.source << ": " << e.error << "\n";
      ++failures;
    }
  return failures == static_cast<int>(manifest.entries.size()) ? 1 : 0;
}

int cmd_degrade(const std::string& input, const std::string& depth_dir,
                const std::string& beta_s, const std::string& binf_s,
                const std::string& output) {
  std::array<double, 3> beta{}, binf{};
  if (!parse_triple(beta_s, beta) || !parse_triple(binf_s, binf)) {
    std::cerr << "--beta and --binf take r,g,b triples\n";
    return 1;
  }
  const auto images = collect_images(input);
  if (images.empty()) {
    std::cerr << "no input images under " << input << "\n";
    return 1;
  }
  fs::create_directories(output);
  int errors = 0;
  for (const auto& path : images) {
    const std::string stem = fs::path(path).stem().string();
    try {
      const diver::ImagePlanar img = diver::io::load_image(path);
      const fs::path dp = fs::path(depth_dir) / (stem + ".png");
      const diver::DepthMap depth =
          diver::normalize_depth(diver::io::load_depth_png(dp.string()));
      diver::require_same_shape(img, depth);
      const diver::ImagePlanar degraded = diver::degrade(img, depth, beta, binf);
      diver::io::save_image((fs::path(output) / (stem + ".png")).string(),
                            degraded);
    } catch (const std::exception& e) {
      std::cerr << "skipped " << path << ": " << e.what() << "\n";
      ++errors;
    }
  }
  return errors == static_cast<int>(images.size()) ? 1 : 0;
}

int cmd_metrics(const std::string& input, const std::string& ref_dir,
                const std::string& patches, const std::string& report_path) {
  const auto images = collect_images(input);
  if (images.empty()) {
    std::cerr << "no input images under " << input << "\n";
    return 1;
  }
  diver::RunOptions opts;
  opts.inputs = images;
  opts.ref_dir = ref_dir;
  opts.patches_path = patches;
  opts.compute_metrics = true;
  diver::PipelineConfig cfg;
  cfg.last_stage = diver::Stage::Route;  // measure inputs as-is
  const diver::RunManifest manifest = diver::run_pipeline(opts, cfg);
  emit_report(report_path, diver::format_report(manifest));
  return 0;
}

struct SelfTest {
  int failed = 0;
  void check(const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failed;
  }
  void close(const std::string& name, double got, double want, double tol) {
    const bool ok = std::fabs(got - want) <= tol;
    if (!ok)
      std::cout << "FAIL  " << name << " (got " << got << ", want " << want
                << ")\n";
    else
      std::cout << "PASS  " << name << "\n";
    failed += ok ? 0 : 1;
  }
};

int cmd_selftest() {
  using namespace diver;
  SelfTest t;

  // Formula oracles.
  DepthMap z1(1, 1, 1.0);
  t.close("backscatter f_B(1)",
          backscatter_physical(z1, 0.3, 0.1, 0.8, 1.2).at(0, 0),
          0.195320731956, 1e-9);
  {
    ImagePlanar j(1, 1, 0.8);
    DepthMap z(1, 1, 2.0);
    t.close("degrade scalar",
            degrade(j, z, {0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}).plane(0).at(0, 0),
            0.420727664703, 1e-9);
  }
  {
    ImagePlanar red(2, 2, 0.0);
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) red.plane(0).at(x, y) = 1.0;
    t.close("gpmae pure red", gpmae(red, {{0, 0, 2, 2}}), 54.735610317245,
            1e-6);
  }

  // Gradient checks with kink-crossing rejection.
  DeterministicRng rng(20240229);
  const int n = 16;
  DepthMap z(n, n);
  for (auto& v : z.plane.samples()) v = rng.uniform01();
  ImagePlanar uh(n, n);
  for (auto& p : uh.planes)
    for (auto& v : p.samples()) v = rng.uniform(0.05, 0.95);

  double worst_veil = 0.0;
  for (int k = 0; k < 5; ++k) {
    VeilParams vp{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                  rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    std::array<double, 4> g;
    veil_loss_and_grad(z, vp, SoftplusVariant::PaperPiecewise, HuberConfig{},
                       &g);
    auto f = [&](const std::vector<double>& x) {
      VeilParams q{x[0], x[1], x[2], x[3]};
      return veil_loss_and_grad(z, q, SoftplusVariant::PaperPiecewise,
                                HuberConfig{}, nullptr);
    };
    worst_veil = std::max(
        worst_veil, grad_check(f, {vp.b1_mag, vp.b2_mag, vp.b1_raw, vp.b2_raw},
                               {g[0], g[1], g[2], g[3]}, 1e-4));
  }
  t.check("veil gradient vs finite differences (<1e-4)", worst_veil < 1e-4);

  std::cout << (t.failed == 0 ? "selftest: all checks passed\n"
                              : "selftest: FAILURES\n");
  return t.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DIVER underwater image restoration"};
  app.require_subcommand(1);

  // enhance
  auto* enhance = app.add_subcommand("enhance", "Restore images");
  std::string in, out_dir, depth_dir, config_path, ref_dir, patches, report;
  std::string stages = "route,illuminate,aocm,hydro";
  std::uint64_t seed = 0;
  bool metrics = false, joint = false, write_stages = false;
  enhance->add_option("--input", in, "Image file or directory")->required();
  enhance->add_option("--output", out_dir, "Output directory");
  enhance->add_option("--depth", depth_dir,
                      "Directory of 16-bit depth PNGs named by image stem");
  enhance->add_option("--config", config_path, "key=value config file");
  enhance->add_option("--stages", stages,
                      "Comma list from route,illuminate|sef,aocm,hydro");
  enhance->add_flag("--metrics", metrics, "Compute quality metrics");
  enhance->add_option("--ref", ref_dir, "Reference images for PSNR/SSIM");
  enhance->add_option("--patches", patches,
                      "Gray-patch file (or directory of <stem>.txt)");
  enhance->add_option("--report", report, "Report path ('-' for stdout)");
  enhance->add_option("--seed", seed, "Fit seed");
  enhance->add_flag("--joint", joint, "Average fit losses across the folder");
  enhance->add_flag("--write-stages", write_stages,
                    "Also write intermediate stage images");

  // degrade
  auto* degrade_cmd =
      app.add_subcommand("degrade", "Apply the forward degradation model");
  std::string d_in, d_depth, d_beta, d_binf, d_out;
  degrade_cmd->add_option("--input", d_in, "Clean image directory")->required();
  degrade_cmd->add_option("--depth", d_depth, "Depth directory")->required();
  degrade_cmd->add_option("--beta", d_beta, "Attenuation r,g,b")->required();
  degrade_cmd->add_option("--binf", d_binf, "Backscatter asymptote r,g,b")
      ->required();
  degrade_cmd->add_option("--output", d_out, "Output directory")->required();

  // metrics
  auto* metrics_cmd =
      app.add_subcommand("metrics", "Score images without enhancing");
  std::string m_in, m_ref, m_patches, m_report;
  metrics_cmd->add_option("--input", m_in, "Image file or directory")
      ->required();
  metrics_cmd->add_option("--ref", m_ref, "Reference images for PSNR/SSIM");
  metrics_cmd->add_option("--patches", m_patches, "Gray-patch annotations");
  metrics_cmd->add_option("--report", m_report, "Report path ('-' for stdout)")
      ->required();

  // selftest
  auto* selftest =
      app.add_subcommand("selftest", "Run gradient checks and formula oracles");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enhance)
      return cmd_enhance(in, out_dir, depth_dir, config_path, stages, metrics,
                         ref_dir, patches, report, seed, joint, write_stages);
    if (*degrade_cmd) return cmd_degrade(d_in, d_depth, d_beta, d_binf, d_out);
    if (*metrics_cmd) return cmd_metrics(m_in, m_ref, m_patches, m_report);
    if (*selftest) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "diver/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "diver/image_io.hpp"
#include "diver/optim.hpp"

namespace fs = std::filesystem;

namespace diver {

PipelineConfig make_pipeline_config(const Config& c) {
  PipelineConfig p;
  p.sef.alpha = c.get_double("sef.alpha", p.sef.alpha);
  p.sef.epsilon = c.get_double("sef.epsilon", p.sef.epsilon);

  p.illuminate.lr = c.get_double("illuminate.lr", p.illuminate.lr);
  p.illuminate.iters = c.get_int("illuminate.iters", p.illuminate.iters);
  p.illuminate.lambda1 = c.get_double("illuminate.lambda1", p.illuminate.lambda1);
  p.illuminate.lambda2 = c.get_double("illuminate.lambda2", p.illuminate.lambda2);
  p.illuminate.target = c.get_double("illuminate.target", p.illuminate.target);
  p.illuminate.patch_radius =
      c.get_int("illuminate.patch_radius", p.illuminate.patch_radius);
  p.illuminate.t_min = c.get_double("illuminate.t_min", p.illuminate.t_min);

  p.hssf.hue_low = c.get_double("aocm.hue_low", p.hssf.hue_low);
  p.hssf.hue_high = c.get_double("aocm.hue_high", p.hssf.hue_high);
  p.hssf.s_min = c.get_double("aocm.s_min", p.hssf.s_min);
  p.hssf.v_min = c.get_double("aocm.v_min", p.hssf.v_min);
  p.hssf.lambda = c.get_double("aocm.lambda", p.hssf.lambda);

  p.hydro.lr = c.get_double("hydro.lr", p.hydro.lr);
  p.hydro.iters = c.get_int("hydro.iters", p.hydro.iters);
  p.hydro.huber.delta = c.get_double("hydro.delta", p.hydro.huber.delta);
  p.hydro.huber.eta = c.get_double("hydro.eta", p.hydro.huber.eta);
  p.hydro.p_terms = c.get_int("hydro.p_terms", p.hydro.p_terms);
  p.hydro.target = c.get_double("hydro.target", p.hydro.target);
  const std::string sp = c.get_string("hydro.softplus", "paper");
  if (sp == "paper")
    p.hydro.softplus = SoftplusVariant::PaperPiecewise;
  else if (sp == "smooth")
    p.hydro.softplus = SoftplusVariant::StandardSmooth;
  else
    throw std::runtime_error("config: hydro.softplus must be paper or smooth");

  p.seed = c.get_u64("seed", p.seed);
  return p;
}

Stage parse_stages(const std::string& spec) {
  Stage last = Stage::Route;
  bool any = false;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) continue;
    Stage s;
    if (tok == "route")
      s = Stage::Route;
    else if (tok == "illuminate" || tok == "sef" || tok == "enhance")
      s = Stage::Enhance;
    else if (tok == "aocm")
      s = Stage::Aocm;
    else if (tok == "hydro")
      s = Stage::Hydro;
    else
      throw std::runtime_error("unknown stage: " + tok);
    if (static_cast<int>(s) > static_cast<int>(last)) last = s;
    any = true;
  }
  if (!any) throw std::runtime_error("empty stage set");
  return last;
}

DepthMap normalize_depth(const DepthMap& raw) {
  double mn = raw.plane.samples()[0], mx = mn;
  for (double v : raw.plane.samples()) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  DepthMap out(raw.width(), raw.height());
  auto src = raw.plane.samples();
  auto dst = out.plane.samples();
  if (mx == mn) {  // degenerate range maps to the documented constant
    std::fill(dst.begin(), dst.end(), 0.5);
    return out;
  }
  const double inv = 1.0 / (mx - mn);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - mn) * inv;
  return out;
}

DepthMap fallback_depth_prior(const ImagePlanar& img) {
  DepthMap raw(img.width(), img.height());
  auto r = img.plane(0).samples(), g = img.plane(1).samples(),
       b = img.plane(2).samples();
  auto d = raw.plane.samples();
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = std::max(g[i], b[i]) - r[i];
  DepthMap out = normalize_depth(raw);
  clamp01(out.plane);
  return out;
}

StageOutputs run_stages(const ImagePlanar& img, const DepthMap* depth,
                        const PipelineConfig& cfg) {
  StageOutputs out;
  out.route = assess_illumination(img);
  if (static_cast<int>(cfg.last_stage) < static_cast<int>(Stage::Enhance))
    return out;

  if (out.route.branch == Branch::LowLight) {
    if (!depth)
      throw std::invalid_argument("run_stages: low-light branch needs depth");
    IlluminateConfig icfg = cfg.illuminate;
    icfg.seed = cfg.seed;
    IlluminateResult ir = fit_illuminate(img, *depth, icfg);
    out.enhanced = std::move(ir.enhanced);
    out.illuminate_trace = std::move(ir.loss_trace);
  } else {
    out.enhanced = apply_sef(img, cfg.sef);
  }
  if (static_cast<int>(cfg.last_stage) < static_cast<int>(Stage::Aocm))
    return out;

  out.aocm_out = hssf(cef(*out.enhanced), cfg.hssf);
  if (static_cast<int>(cfg.last_stage) < static_cast<int>(Stage::Hydro))
    return out;

  if (!depth)
    throw std::invalid_argument("run_stages: hydro stage needs depth");
  HydroConfig hcfg = cfg.hydro;
  hcfg.seed = cfg.seed;
  HydroResult hr = fit_hydrooptic(*out.aocm_out, *depth, hcfg);
  out.hydro_out = std::move(hr.restored);
  out.veil_trace = std::move(hr.veil_loss_trace);
  out.atten_trace = std::move(hr.atten_loss_trace);
  return out;
}

namespace {

struct LoadedInput {
  std::string path;
  std::string stem;
  ImagePlanar image;
  std::optional<DepthMap> depth;
  std::string depth_ref;
  RouteDecision route;
  bool ok = true;
  std::string error;
};

bool needs_depth(const PipelineConfig& cfg, Branch branch) {
  if (static_cast<int>(cfg.last_stage) >= static_cast<int>(Stage::Hydro))
    return true;
  return static_cast<int>(cfg.last_stage) >= static_cast<int>(Stage::Enhance) &&
         branch == Branch::LowLight;
}

std::string find_by_stem(const std::string& dir, const std::string& stem) {
  for (const char* ext : {".png", ".jpg", ".jpeg", ".PNG", ".JPG", ".JPEG"}) {
    const fs::path p = fs::path(dir) / (stem + ext);
    if (fs::exists(p)) return p.string();
  }
  return "";
}

// Joint folder mode: one shared parameter set per fit, losses averaged
// across the participating images.
void run_joint(std::vector<LoadedInput>& inputs,
               std::vector<StageOutputs>& stage_outs,
               const PipelineConfig& cfg) {
  // Shared IlluminateNet fit over the low-light subset.
  std::vector<std::size_t> low_idx;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i].ok && inputs[i].route.branch == Branch::LowLight)
      low_idx.push_back(i);

  if (static_cast<int>(cfg.last_stage) >= static_cast<int>(Stage::Enhance)) {
    std::vector<TransmissionMap> tmaps;
    IlluminateConfig icfg = cfg.illuminate;
    icfg.seed = cfg.seed;
    for (std::size_t i : low_idx) {
      const AmbientLight a = estimate_ambient(inputs[i].image, *inputs[i].depth);
      tmaps.push_back(transmission_map(inputs[i].image, a, icfg.patch_radius,
                                       icfg.t_min));
    }
    if (!low_idx.empty()) {
      std::vector<double> theta = {0.0, 0.0, 0.0};
      AdamState adam(3, icfg.lr);
      std::vector<double> trace;
      for (int it = 0; it < icfg.iters; ++it) {
        std::array<double, 3> th{theta[0], theta[1], theta[2]};
        std::array<double, 3> gsum{0, 0, 0};
        double loss = 0.0;
        for (std::size_t k = 0; k < low_idx.size(); ++k) {
          std::array<double, 3> g;
          loss += illuminate_loss_and_grad(inputs[low_idx[k]].image, tmaps[k],
                                           th, icfg, &g);
          for (int c = 0; c < 3; ++c) gsum[c] += g[c];
        }
        const double inv = 1.0 / static_cast<double>(low_idx.size());
        loss *= inv;
        if (!std::isfinite(loss))
          throw std::runtime_error("joint illuminate fit: non-finite loss");
        std::vector<double> g = {gsum[0] * inv, gsum[1] * inv, gsum[2] * inv};
        adam_step(adam, theta, g);
        trace.push_back(loss);
      }
      GlobalLightParams params;
      params.theta = {theta[0], theta[1], theta[2]};
      for (std::size_t k = 0; k < low_idx.size(); ++k) {
        ImagePlanar enhanced =
            forward_illuminate(inputs[low_idx[k]].image, tmaps[k], params);
        clamp01(enhanced);
        stage_outs[low_idx[k]].enhanced = std::move(enhanced);
        stage_outs[low_idx[k]].illuminate_trace = trace;
      }
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!inputs[i].ok || inputs[i].route.branch != Branch::WellLit) continue;
      stage_outs[i].enhanced = apply_sef(inputs[i].image, cfg.sef);
    }
  }

  if (static_cast<int>(cfg.last_stage) >= static_cast<int>(Stage::Aocm)) {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i].ok && stage_outs[i].enhanced)
        stage_outs[i].aocm_out = hssf(cef(*stage_outs[i].enhanced), cfg.hssf);
  }

  if (static_cast<int>(cfg.last_stage) < static_cast<int>(Stage::Hydro)) return;

  // Shared Hydro-OpticNet fit across all surviving images.
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i].ok && stage_outs[i].aocm_out && inputs[i].depth)
      idx.push_back(i);
  if (idx.empty()) return;

  HydroConfig hcfg = cfg.hydro;
  hcfg.seed = cfg.seed;
  DeterministicRng rng(hcfg.seed);
  auto small_init = [&rng]() { return rng.uniform(-0.02, 0.02); };
  const double inv = 1.0 / static_cast<double>(idx.size());

  std::vector<double> vp = {small_init(), small_init(), small_init(),
                            small_init()};
  std::vector<double> veil_trace;
  {
    AdamState adam(vp.size(), hcfg.lr);
    for (int it = 0; it < hcfg.iters; ++it) {
      const VeilParams cur{vp[0], vp[1], vp[2], vp[3]};
      double loss = 0.0;
      std::vector<double> gsum(4, 0.0);
      for (std::size_t i : idx) {
        std::array<double, 4> g;
        loss += veil_loss_and_grad(*inputs[i].depth, cur, hcfg.softplus,
                                   hcfg.huber, &g);
        for (int k = 0; k < 4; ++k) gsum[static_cast<std::size_t>(k)] += g[static_cast<std::size_t>(k)];
      }
      loss *= inv;
      if (!std::isfinite(loss))
        throw std::runtime_error("joint veil fit: non-finite loss");
      for (auto& g : gsum) g *= inv;
      adam_step(adam, vp, gsum);
      veil_trace.push_back(loss);
    }
  }
  const VeilParams veil{vp[0], vp[1], vp[2], vp[3]};

  std::vector<ImagePlanar> directs;
  directs.reserve(idx.size());
  for (std::size_t i : idx) {
    const Plane u_b = veilnet_forward(*inputs[i].depth, veil, hcfg.softplus);
    directs.push_back(direct_signal(*stage_outs[i].aocm_out, u_b));
  }

  std::vector<double> ap(static_cast<std::size_t>(2 * hcfg.p_terms));
  for (auto& v : ap) v = small_init();
  std::vector<double> atten_trace;
  {
    AdamState adam(ap.size(), hcfg.lr);
    for (int it = 0; it < hcfg.iters; ++it) {
      AttenParams cur;
      cur.slope.assign(ap.begin(), ap.begin() + hcfg.p_terms);
      cur.weight.assign(ap.begin() + hcfg.p_terms, ap.end());
      double loss = 0.0;
      std::vector<double> gsum(ap.size(), 0.0);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        std::vector<double> g;
        loss += atten_loss_and_grad(directs[k], *inputs[idx[k]].depth, cur,
                                    hcfg.softplus, hcfg.target, &g);
        for (std::size_t j = 0; j < g.size(); ++j) gsum[j] += g[j];
      }
      loss *= inv;
      if (!std::isfinite(loss))
        throw std::runtime_error("joint atten fit: non-finite loss");
      for (auto& g : gsum) g *= inv;
      adam_step(adam, ap, gsum);
      atten_trace.push_back(loss);
    }
  }
  AttenParams atten;
  atten.slope.assign(ap.begin(), ap.begin() + hcfg.p_terms);
  atten.weight.assign(ap.begin() + hcfg.p_terms, ap.end());

  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    const Plane gain =
        attennet_forward(*inputs[i].depth, atten, hcfg.softplus);
    ImagePlanar restored(directs[k].width(), directs[k].height());
    auto gs = gain.samples();
    for (int c = 0; c < 3; ++c) {
      auto ds = directs[k].plane(c).samples();
      auto js = restored.plane(c).samples();
      for (std::size_t j = 0; j < gs.size(); ++j)
        js[j] = clamp01(ds[j] * gs[j]);
    }
    stage_outs[i].hydro_out = std::move(restored);
    stage_outs[i].veil_trace = veil_trace;
    stage_outs[i].atten_trace = atten_trace;
  }
}

}  // namespace

RunManifest run_pipeline(const RunOptions& opts, const PipelineConfig& cfg) {
  if (opts.inputs.empty())
    throw std::invalid_argument("run_pipeline: no inputs");

  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  std::vector<std::string> paths = opts.inputs;
  std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
    return fs::path(a).stem().string() < fs::path(b).stem().string();
  });

  std::vector<LoadedInput> inputs;
  inputs.reserve(paths.size());
  for (const auto& path : paths) {
    LoadedInput in;
    in.path = path;
    in.stem = fs::path(path).stem().string();
    try {
      in.image = io::load_image(path);
      in.route = assess_illumination(in.image);
    } catch (const std::exception& e) {
      in.ok = false;
      in.error = e.what();
      inputs.push_back(std::move(in));
      continue;
    }

    if (needs_depth(cfg, in.route.branch)) {
      if (cfg.depth_source == DepthSource::Files) {
        const fs::path dp = fs::path(opts.depth_dir) / (in.stem + ".png");
        if (fs::exists(dp)) {
          try {
            in.depth = normalize_depth(io::load_depth_png(dp.string()));
            in.depth_ref = dp.string();
          } catch (const std::exception& e) {
            in.ok = false;
            in.error = e.what();
          }
        } else if (in.route.branch == Branch::WellLit) {
          // Missing depth file is tolerated on the SEF branch.
          in.depth = fallback_depth_prior(in.image);
          in.depth_ref = "prior";
        } else {
          in.ok = false;
          in.error = "depth file missing: " + dp.string();
        }
      } else {
        in.depth = fallback_depth_prior(in.image);
        in.depth_ref = "prior";
      }
    }
    inputs.push_back(std::move(in));
  }

  std::vector<StageOutputs> stage_outs(inputs.size());
  std::vector<std::vector<std::pair<std::string, double>>> timings(
      inputs.size());

  if (cfg.joint) {
    run_joint(inputs, stage_outs, cfg);
    for (std::size_t i = 0; i < inputs.size(); ++i)
      stage_outs[i].route = inputs[i].route;
  } else {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!inputs[i].ok) continue;
      const auto t0 = clock::now();
      try {
        stage_outs[i] = run_stages(
            inputs[i].image, inputs[i].depth ? &*inputs[i].depth : nullptr,
            cfg);
      } catch (const std::exception& e) {
        inputs[i].ok = false;
        inputs[i].error = e.what();
      }
      timings[i].emplace_back("stages", ms_since(t0));
    }
  }

  RunManifest manifest;
  std::map<std::string, std::pair<double, long>> agg;

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ManifestEntry e;
    e.source = inputs[i].path;
    e.stem = inputs[i].stem;
    e.depth_ref = inputs[i].depth_ref;
    e.ok = inputs[i].ok;
    e.error = inputs[i].error;
    e.route = inputs[i].route;
    e.stage_ms = timings[i];
    if (!e.ok) {
      manifest.entries.push_back(std::move(e));
      continue;
    }
    const StageOutputs& so = stage_outs[i];
    e.illuminate_trace = so.illuminate_trace;
    e.veil_trace = so.veil_trace;
    e.atten_trace = so.atten_trace;

    const ImagePlanar& final_img = so.final_image(inputs[i].image);

    if (!opts.output_dir.empty()) {
      fs::create_directories(opts.output_dir);
      auto write = [&](const std::string& tag, const ImagePlanar& img) {
        const fs::path p =
            fs::path(opts.output_dir) / (e.stem + "_" + tag + ".png");
        io::save_image(p.string(), img);
        e.outputs.emplace_back(tag, p.string());
      };
      if (opts.write_stage_outputs) {
        if (so.enhanced) write("enhance", *so.enhanced);
        if (so.aocm_out) write("aocm", *so.aocm_out);
      }
      write("diver", final_img);
    }

    if (opts.compute_metrics) {
      QualityReport q;
      q.route = so.route.branch;
      q.uiqm = uiqm(final_img);
      q.uciqe = uciqe(final_img);
      if (!opts.ref_dir.empty()) {
        const std::string ref = find_by_stem(opts.ref_dir, e.stem);
        if (!ref.empty()) {
          const ImagePlanar ref_img = io::load_image(ref);
          if (ref_img.same_shape(final_img)) {
            q.psnr = psnr(final_img, ref_img);
            q.ssim = ssim(final_img, ref_img);
          }
        }
      }
      if (!opts.patches_path.empty()) {
        std::string pfile;
        if (fs::is_directory(opts.patches_path)) {
          const fs::path p = fs::path(opts.patches_path) / (e.stem + ".txt");
          if (fs::exists(p)) pfile = p.string();
        } else if (fs::exists(opts.patches_path)) {
          pfile = opts.patches_path;
        }
        if (!pfile.empty()) {
          std::ifstream in(pfile);
          std::ostringstream ss;
          ss << in.rdbuf();
          const GrayPatchSet patches = parse_patches(ss.str());
          if (!patches.empty()) q.gpmae = gpmae(final_img, patches);
        }
      }
      auto add = [&agg](const std::string& k, double v) {
        agg[k].first += v;
        agg[k].second += 1;
      };
      add("uiqm", q.uiqm);
      add("uciqe", q.uciqe);
      if (q.psnr) add("psnr", *q.psnr);
      if (q.ssim) add("ssim", *q.ssim);
      if (q.gpmae) add("gpmae", *q.gpmae);
      e.metrics = q;
    }
    manifest.entries.push_back(std::move(e));
  }

  for (const auto& [k, v] : agg)
    manifest.aggregates[k] = v.first / static_cast<double>(v.second);
  return manifest;
}

namespace {
std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(9);
  ss << v;
  return ss.str();
}

void write_trace(std::ostringstream& out, const std::string& name,
                 const std::vector<double>& trace) {
  if (trace.empty()) return;
  out << "  loss." << name << ".initial: " << fmt(trace.front()) << "\n";
  out << "  loss." << name << ".final: " << fmt(trace.back()) << "\n";
  out << "  loss." << name << ".iters: " << trace.size() << "\n";
}
}  // namespace

std::string format_report(const RunManifest& manifest) {
  std::ostringstream out;
  out << "# diver report v1\n";
  for (const auto& e : manifest.entries) {
    out << "image: " << e.stem << "\n";
    out << "  source: " << e.source << "\n";
    if (!e.ok) {
      out << "  status: error\n";
      out << "  error: " << e.error << "\n";
      continue;
    }
    out << "  status: ok\n";
    if (!e.depth_ref.empty()) out << "  depth: " << e.depth_ref << "\n";
    out << "  route: " << to_string(e.route.branch) << "\n";
    out << "  channel_means: " << fmt(e.route.r_avg) << " "
        << fmt(e.route.g_avg) << " " << fmt(e.route.b_avg) << "\n";
    for (const auto& [tag, path] : e.outputs)
      out << "  output." << tag << ": " << path << "\n";
    write_trace(out, "illuminate", e.illuminate_trace);
    write_trace(out, "veil", e.veil_trace);
    write_trace(out, "atten", e.atten_trace);
    if (e.metrics) {
      const auto& q = *e.metrics;
      out << "  metric.uiqm: " << fmt(q.uiqm) << "\n";
      out << "  metric.uciqe: " << fmt(q.uciqe) << "\n";
      if (q.psnr) out << "  metric.psnr: " << fmt(*q.psnr) << "\n";
      if (q.ssim) out << "  metric.ssim: " << fmt(*q.ssim) << "\n";
      if (q.gpmae) out << "  metric.gpmae: " << fmt(*q.gpmae) << "\n";
    }
    for (const auto& [tag, ms] : e.stage_ms)
      out << "  time." << tag << "_ms: " << fmt(ms) << "\n";
  }
  if (!manifest.aggregates.empty()) {
    out << "aggregate:\n";
    for (const auto& [k, v] : manifest.aggregates)
      out << "  mean." << k << ": " << fmt(v) << "\n";
  }
  return out.str();
}

}  // namespace diver

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diver/aocm.hpp"
#include "diver/config.hpp"
#include "diver/hydrooptic.hpp"
#include "diver/illuminate.hpp"
#include "diver/image.hpp"
#include "diver/metrics.hpp"
#include "diver/router.hpp"
#include "diver/sef.hpp"

namespace diver {

/// Ordered stage prefix: route -> enhance (illuminate|sef) -> aocm -> hydro.
enum class Stage { Route = 0, Enhance = 1, Aocm = 2, Hydro = 3 };

enum class DepthSource { Files, FallbackPrior };

struct PipelineConfig {
  SefConfig sef;
  IlluminateConfig illuminate;
  HssfConfig hssf;
  HydroConfig hydro;
  Stage last_stage = Stage::Hydro;  // the set is an order-respecting prefix
  DepthSource depth_source = DepthSource::FallbackPrior;
  std::uint64_t seed = 0;
  bool joint = false;  // folder mode: average losses across images per fit
};

/// Builds a PipelineConfig from flat key=value entries (module defaults for
/// missing keys). Recognized keys are listed in the README.
PipelineConfig make_pipeline_config(const Config& cfg);

/// Parses "route,illuminate,aocm,hydro" (tokens sef/enhance alias
/// illuminate); the result is the longest named stage.
Stage parse_stages(const std::string& spec);

/// Min-max normalizes raw depth samples to [0,1]; a degenerate (constant)
/// range maps to the documented constant 0.5.
DepthMap normalize_depth(const DepthMap& raw);

/// Red-attenuation depth prior: normalized(max(G,B) - R).
DepthMap fallback_depth_prior(const ImagePlanar& img);

struct StageOutputs {
  RouteDecision route;
  std::optional<ImagePlanar> enhanced;   // after illuminate or sef
  std::optional<ImagePlanar> aocm_out;   // after cef + hssf
  std::optional<ImagePlanar> hydro_out;  // after hydro-optic restoration
  std::vector<double> illuminate_trace;
  std::vector<double> veil_trace;
  std::vector<double> atten_trace;

  const ImagePlanar& final_image(const ImagePlanar& input) const {
    if (hydro_out) return *hydro_out;
    if (aocm_out) return *aocm_out;
    if (enhanced) return *enhanced;
    return input;
  }
};

/// Runs the configured stage prefix on one image. `depth` may be null when
/// no executed stage needs it; throws std::invalid_argument otherwise.
StageOutputs run_stages(const ImagePlanar& img, const DepthMap* depth,
                        const PipelineConfig& cfg);

struct ManifestEntry {
  std::string source;
  std::string stem;
  std::string depth_ref;  // path or "prior"
  bool ok = true;
  std::string error;
  RouteDecision route;
  std::vector<std::pair<std::string, std::string>> outputs;  // stage -> path
  std::vector<double> illuminate_trace, veil_trace, atten_trace;
  std::optional<QualityReport> metrics;
  std::vector<std::pair<std::string, double>> stage_ms;
};

struct RunManifest {
  std::vector<ManifestEntry> entries;
  std::map<std::string, double> aggregates;  // mean per present metric
};

struct RunOptions {
  std::vector<std::string> inputs;     // image files, sorted by the runner
  std::string output_dir;              // empty: write nothing
  std::string depth_dir;               // Files mode: <stem>.png expected here
  std::string ref_dir;                 // optional reference images by stem
  std::string patches_path;            // file, or directory of <stem>.txt
  bool compute_metrics = false;
  bool write_stage_outputs = false;    // also write intermediate stages
};

/// Batch runner: per image, executes the stage prefix, writes requested
/// outputs, computes requested metrics, and records everything in the
/// manifest. Unreadable inputs and per-image stage errors are recorded and
/// skipped, never fatal.
RunManifest run_pipeline(const RunOptions& opts, const PipelineConfig& cfg);

/// Deterministic structured-text report; wall-clock milliseconds appear on
/// lines prefixed "time." so consumers can exclude them when comparing runs.
std::string format_report(const RunManifest& manifest);

}  // namespace diver

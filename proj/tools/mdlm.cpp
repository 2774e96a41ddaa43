// mdlm: simulate / fit / group / map / inspect driver around the core
// library.  Every command writes a JSON manifest (config echoed, inputs
// hashed) so a run can be reproduced bit for bit from its artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdlm/design.hpp"
#include "mdlm/dump.hpp"
#include "mdlm/errors.hpp"
#include "mdlm/events.hpp"
#include "mdlm/hash.hpp"
#include "mdlm/nifti.hpp"
#include "mdlm/pipeline.hpp"
#include "mdlm/simulate.hpp"

namespace {

using json = nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mdlm::InputError("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw mdlm::IoFailure("failed reading '" + path + "'");
  return out.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mdlm::IoFailure("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw mdlm::IoFailure("failed writing '" + path + "'");
}

json input_entry(const std::string& path) {
  return json{{"path", path}, {"git_blob", mdlm::git_blob_hash(path)}};
}

// Outputs are recorded relative to the manifest that names them, so a seeded
// rerun into a different directory still produces byte-identical manifests.
json output_entry(const std::filesystem::path& dir, const std::string& name) {
  return json{{"path", name},
              {"git_blob", mdlm::git_blob_hash((dir / name).string())}};
}

void write_manifest(const std::string& path, const json& manifest) {
  spit(path, manifest.dump(2) + "\n");
}

// Counts warnings for the manifest while still echoing them to stderr.
struct WarnCounter {
  std::size_t count = 0;
  mdlm::WarnHandler prev;

  WarnCounter() {
    prev = mdlm::set_warn_handler([this](const std::string& msg) {
      ++count;
      std::cerr << "warning: " << msg << "\n";
    });
  }
  ~WarnCounter() { mdlm::set_warn_handler(prev); }
  WarnCounter(const WarnCounter&) = delete;
  WarnCounter& operator=(const WarnCounter&) = delete;
};

std::string zero_pad(int value, int width) {
  std::ostringstream out;
  out << std::setw(width) << std::setfill('0') << value;
  return out.str();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string mask_output_path(const std::string& out) {
  const std::string ext = ".nii";
  if (out.size() > ext.size() &&
      out.compare(out.size() - ext.size(), ext.size(), ext) == 0) {
    return out.substr(0, out.size() - ext.size()) + "_mask.nii";
  }
  return out + "_mask.nii";
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_simulate(const SimulateArgs& args) {
  WarnCounter warnings;
  mdlm::SimSpec spec = mdlm::sim_spec_from_json(slurp(args.spec_path));
  if (args.seed_set) spec.seed = args.seed;
  spec.validate();

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  const mdlm::SimOutput out = mdlm::simulate_group(spec);

  json outputs = json::array();
  for (std::size_t z = 0; z < out.subjects.size(); ++z) {
    const std::string name =
        "sub-" + zero_pad(static_cast<int>(z) + 1, 3) + "_bold.nii";
    mdlm::write_nifti1(out.subjects[z], (dir / name).string());
    outputs.push_back(output_entry(dir, name));
  }
  mdlm::write_nifti1(out.truth, (dir / "truth.nii").string());
  outputs.push_back(output_entry(dir, "truth.nii"));

  // Events file in the shape `fit` expects, one row per stimulus event.
  std::ostringstream tsv;
  tsv << "onset\tduration\ttrial_type\n";
  std::vector<std::pair<double, std::pair<double, std::string>>> rows;
  for (const mdlm::StimulusTrack& track : spec.tracks) {
    const std::string label = track.label.empty() ? "task" : track.label;
    for (std::size_t i = 0; i < track.onsets.size(); ++i) {
      rows.push_back({track.onsets[i], {track.durations[i], label}});
    }
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& row : rows) {
    tsv << format_double(row.first) << '\t' << format_double(row.second.first)
        << '\t' << row.second.second << '\n';
  }
  spit((dir / "events.tsv").string(), tsv.str());
  outputs.push_back(output_entry(dir, "events.tsv"));

  json manifest;
  manifest["command"] = "simulate";
  manifest["spec"] = json::parse(mdlm::sim_spec_to_json(spec));
  manifest["spec_file"] = input_entry(args.spec_path);
  manifest["amplitudes"] = out.amplitudes;
  manifest["outputs"] = outputs;
  manifest["warnings"] = warnings.count;
  write_manifest((dir / "manifest.json").string(), manifest);

  std::cout << "simulated " << out.subjects.size() << " subject(s), "
            << spec.dims.nx << "x" << spec.dims.ny << "x" << spec.dims.nz
            << " grid, T=" << spec.T << " -> " << args.out_dir << "\n";
  return 0;
}

// --- fit ----------------------------------------------------------------------

struct FitArgs {
  std::string bold;
  std::string events;
  std::string mask;
  std::string out;
  double tr = 0.0;
  bool merge_events = false;
  bool no_intercept = false;
  mdlm::FitOptions opt;
};

int cmd_fit(const FitArgs& args) {
  WarnCounter warnings;
  const mdlm::Volume4D bold = mdlm::read_nifti1(args.bold);
  const double tr = args.tr > 0.0 ? args.tr : bold.tr_seconds;
  if (!(tr > 0.0)) {
    throw mdlm::InputError(
        "the volume does not record a repetition time; pass --tr");
  }

  std::vector<mdlm::StimulusTrack> tracks = mdlm::read_events(args.events);
  if (args.merge_events) {
    tracks = {mdlm::merge_tracks(tracks)};
  }
  mdlm::DesignSpec dspec;
  dspec.tracks = tracks;
  dspec.tr_seconds = tr;
  dspec.n_scans = bold.T;
  dspec.include_intercept = !args.no_intercept;
  const mdlm::DesignMatrix design = mdlm::assemble_design(dspec);

  mdlm::VolumeMask mask =
      args.mask.empty()
          ? mdlm::VolumeMask::full(bold.dims)
          : mdlm::VolumeMask::from_volume(mdlm::read_nifti1(args.mask));

  const mdlm::FitSummary summary =
      mdlm::fit_to_dump(bold, mask, design, args.opt, args.out);

  const std::string design_path = args.out + ".design.json";
  spit(design_path, mdlm::design_to_json(design));

  json manifest;
  manifest["command"] = "fit";
  json inputs;
  inputs["bold"] = input_entry(args.bold);
  inputs["events"] = input_entry(args.events);
  if (!args.mask.empty()) inputs["mask"] = input_entry(args.mask);
  manifest["inputs"] = inputs;
  manifest["config"] = {{"tr_seconds", tr},
                        {"radius", args.opt.radius},
                        {"discount", args.opt.discount},
                        {"c0_scale", args.opt.c0_scale},
                        {"s0_scale", args.opt.s0_scale},
                        {"n0", args.opt.n0},
                        {"merge_events", args.merge_events},
                        {"intercept", !args.no_intercept}};
  manifest["design"] = design_path;
  manifest["design_columns"] = design.names;
  manifest["summary"] = {{"n_voxels", summary.n_voxels},
                         {"T", summary.T},
                         {"p", summary.p},
                         {"q_nominal", summary.q_nominal},
                         {"final_dof", summary.final_dof},
                         {"degraded", summary.degraded}};
  manifest["warnings"] = warnings.count;
  write_manifest(args.out + ".manifest.json", manifest);

  std::cout << "fit " << summary.n_voxels << " voxel(s), T=" << summary.T
            << ", p=" << summary.p << ", final dof=" << summary.final_dof
            << (summary.degraded ? " (degraded normal approximation)" : "")
            << " -> " << args.out << "\n";
  return 0;
}

// --- group ---------------------------------------------------------------------

struct GroupArgs {
  std::vector<std::string> dumps;
  std::string out;
  double pooled_dof = 0.0;
};

int cmd_group(const GroupArgs& args) {
  WarnCounter warnings;
  const mdlm::GroupSummary summary =
      mdlm::combine_dumps(args.dumps, args.out, args.pooled_dof);

  json manifest;
  manifest["command"] = "group";
  json inputs = json::array();
  for (const std::string& path : args.dumps) inputs.push_back(input_entry(path));
  manifest["inputs"] = inputs;
  manifest["config"] = {{"pooled_dof_override", args.pooled_dof}};
  manifest["summary"] = {{"n_subjects", summary.n_subjects},
                         {"pooled_dof", summary.pooled_dof},
                         {"n_voxels", summary.n_voxels}};
  manifest["warnings"] = warnings.count;
  write_manifest(args.out + ".manifest.json", manifest);

  std::cout << "combined " << summary.n_subjects << " subject(s), pooled dof="
            << summary.pooled_dof << " -> " << args.out << "\n";
  return 0;
}

// --- map -----------------------------------------------------------------------

struct MapArgs {
  std::string group;
  std::vector<std::string> subjects;
  std::string design;
  std::string out;
  mdlm::MapOptions opt;
};

const std::map<mdlm::SamplerKind, std::string> kSamplerNames = {
    {mdlm::SamplerKind::fest, "fest"},
    {mdlm::SamplerKind::fsts, "fsts"},
    {mdlm::SamplerKind::ffbs, "ffbs"},
    {mdlm::SamplerKind::ag, "ag"}};
const std::map<mdlm::EffectKind, std::string> kEffectNames = {
    {mdlm::EffectKind::marginal, "marginal"},
    {mdlm::EffectKind::average_cluster, "ace"},
    {mdlm::EffectKind::joint, "joint"}};
const std::map<mdlm::PositivityRule, std::string> kRuleNames = {
    {mdlm::PositivityRule::all_t, "all-t"},
    {mdlm::PositivityRule::mean_over_t, "mean-over-t"}};
const std::map<mdlm::JointRule, std::string> kJointRuleNames = {
    {mdlm::JointRule::all_components, "all"},
    {mdlm::JointRule::center_only, "center"}};

int cmd_map(const MapArgs& args) {
  WarnCounter warnings;
  if (!args.group.empty() && !args.subjects.empty()) {
    throw mdlm::BadOption("--group and --subjects are mutually exclusive");
  }
  std::vector<std::string> dumps =
      args.group.empty() ? args.subjects : std::vector<std::string>{args.group};
  if (dumps.empty()) {
    throw mdlm::BadOption("a posterior dump is required (--group or --subjects)");
  }

  std::unique_ptr<mdlm::DesignMatrix> design;
  if (!args.design.empty()) {
    design = std::make_unique<mdlm::DesignMatrix>(
        mdlm::design_from_json(slurp(args.design)));
  }

  const mdlm::MapResult result =
      mdlm::evidence_map(dumps, design.get(), args.opt);
  mdlm::write_nifti1(result.evidence, args.out);
  const std::string mask_path = mask_output_path(args.out);
  mdlm::write_nifti1(result.above_threshold, mask_path);

  const mdlm::SamplerConfig& cfg = args.opt.cfg;
  json manifest;
  manifest["command"] = "map";
  json inputs = json::array();
  for (const std::string& path : dumps) inputs.push_back(input_entry(path));
  manifest["inputs"] = inputs;
  if (design) manifest["design"] = input_entry(args.design);
  json config;
  config["sampler"] = kSamplerNames.at(cfg.sampler);
  if (cfg.sampler == mdlm::SamplerKind::ag) {
    config["base"] = kSamplerNames.at(cfg.ag_base);
  }
  config["effect"] = kEffectNames.at(cfg.effect);
  config["rule"] = kRuleNames.at(cfg.rule);
  config["joint_rule"] = kJointRuleNames.at(cfg.joint_rule);
  config["n_simu"] = cfg.n_simu;
  config["seed"] = cfg.seed;
  config["covariate"] = cfg.covariate;
  config["threshold"] = args.opt.threshold;
  manifest["config"] = config;
  manifest["model"] = {{"discount", result.source.discount},
                       {"prior",
                        {{"n0", result.source.n0},
                         {"c0_scale", result.source.c0_scale},
                         {"s0_scale", result.source.s0_scale}}},
                       {"radius", result.source.radius},
                       {"pooled_dof", result.source.pooled_dof},
                       {"n_subjects", result.source.n_subjects}};
  manifest["summary"] = {{"n_voxels", result.n_voxels},
                         {"degraded", result.degraded}};
  manifest["outputs"] = {input_entry(args.out), input_entry(mask_path)};
  manifest["warnings"] = warnings.count;
  write_manifest(args.out + ".manifest.json", manifest);

  std::cout << "mapped " << result.n_voxels << " voxel(s) with "
            << kSamplerNames.at(cfg.sampler) << "/"
            << kEffectNames.at(cfg.effect) << " -> " << args.out << "\n";
  return 0;
}

// --- inspect --------------------------------------------------------------------

void inspect_dump(const std::string& path) {
  mdlm::DumpReader reader(path);
  const mdlm::DumpHeader& h = reader.header();
  std::cout << path << ": posterior dump ("
            << (h.kind == mdlm::DumpKind::subject ? "subject" : "group")
            << ")\n"
            << "  grid " << h.dims.nx << "x" << h.dims.ny << "x" << h.dims.nz
            << ", T=" << h.T << ", p=" << h.p << ", q<=" << h.q_nominal
            << ", records=" << h.n_voxels << "\n"
            << "  radius=" << h.radius << ", discount=" << h.discount
            << ", n0=" << h.n0 << ", c0_scale=" << h.c0_scale
            << ", s0_scale=" << h.s0_scale << "\n"
            << "  subjects=" << h.n_subjects << ", pooled dof=" << h.pooled_dof
            << "\n";
}

void inspect_nifti(const std::string& path) {
  const mdlm::Volume4D vol = mdlm::read_nifti1(path);
  std::cout << path << ": NIfTI-1 volume\n"
            << "  grid " << vol.dims.nx << "x" << vol.dims.ny << "x"
            << vol.dims.nz << ", T=" << vol.T << "\n"
            << "  voxel " << vol.voxel_mm[0] << "x" << vol.voxel_mm[1] << "x"
            << vol.voxel_mm[2] << " mm, TR=" << vol.tr_seconds << " s\n";
  if (vol.has_header) {
    std::cout << "  datatype=" << vol.header.datatype
              << ", bitpix=" << vol.header.bitpix
              << ", vox_offset=" << vol.header.vox_offset
              << ", scl_slope=" << vol.header.scl_slope
              << ", scl_inter=" << vol.header.scl_inter << "\n";
  }
}

int cmd_inspect(const std::vector<std::string>& paths) {
  for (const std::string& path : paths) {
    if (path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
      std::cout << path << ":\n" << json::parse(slurp(path)).dump(2) << "\n";
      continue;
    }
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw mdlm::InputError("cannot open '" + path + "'");
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::string(magic, 4) == "MDLM") {
      inspect_dump(path);
    } else {
      inspect_nifti(path);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-variate DLM toolkit: simulate, fit, combine and map"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read option defaults from an INI file");

  const std::map<std::string, mdlm::SamplerKind> sampler_values = {
      {"fest", mdlm::SamplerKind::fest},
      {"fsts", mdlm::SamplerKind::fsts},
      {"ffbs", mdlm::SamplerKind::ffbs},
      {"ag", mdlm::SamplerKind::ag}};
  const std::map<std::string, mdlm::SamplerKind> base_values = {
      {"fest", mdlm::SamplerKind::fest},
      {"fsts", mdlm::SamplerKind::fsts},
      {"ffbs", mdlm::SamplerKind::ffbs}};
  const std::map<std::string, mdlm::EffectKind> effect_values = {
      {"marginal", mdlm::EffectKind::marginal},
      {"ace", mdlm::EffectKind::average_cluster},
      {"joint", mdlm::EffectKind::joint}};
  const std::map<std::string, mdlm::PositivityRule> rule_values = {
      {"all-t", mdlm::PositivityRule::all_t},
      {"mean-over-t", mdlm::PositivityRule::mean_over_t}};
  const std::map<std::string, mdlm::JointRule> joint_rule_values = {
      {"all", mdlm::JointRule::all_components},
      {"center", mdlm::JointRule::center_only}};

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "synthesize a group dataset");
  sim->add_option("spec", sim_args.spec_path, "JSON simulation spec")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_args.out_dir, "output directory")->required();
  sim->add_option("--seed", sim_args.seed, "override the spec seed")
      ->each([&](const std::string&) { sim_args.seed_set = true; });

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "filter one subject into a dump");
  fit->add_option("--bold", fit_args.bold, "BOLD volume (.nii or .nii.gz)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--events", fit_args.events, "BIDS-style events TSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--mask", fit_args.mask, "analysis mask volume (nonzero = in)")
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fit_args.out, "output posterior dump")->required();
  fit->add_option("--tr", fit_args.tr, "repetition time override, seconds");
  fit->add_option("--radius", fit_args.opt.radius, "cluster radius, voxels");
  fit->add_option("--discount", fit_args.opt.discount, "discount factor");
  fit->add_option("--c0", fit_args.opt.c0_scale, "prior row-covariance scale");
  fit->add_option("--s0-scale", fit_args.opt.s0_scale, "prior column-scale");
  fit->add_option("--n0", fit_args.opt.n0, "prior degrees of freedom");
  fit->add_option("--workers", fit_args.opt.workers,
                  "worker threads (0: MDLM_WORKERS or hardware)");
  fit->add_flag("--merge-events", fit_args.merge_events,
                "collapse all trial types into one regressor");
  fit->add_flag("--no-intercept", fit_args.no_intercept,
                "drop the intercept column");

  GroupArgs group_args;
  CLI::App* group = app.add_subcommand("group", "combine subject dumps");
  group->add_option("dumps", group_args.dumps, "subject posterior dumps")
      ->required()
      ->check(CLI::ExistingFile);
  group->add_option("--out", group_args.out, "output group dump")->required();
  group->add_option("--pooled-dof", group_args.pooled_dof,
                    "override the pooled degrees of freedom");

  MapArgs map_args;
  CLI::App* map_cmd = app.add_subcommand("map", "Monte Carlo evidence map");
  map_cmd->add_option("--group", map_args.group, "group (or single) dump")
      ->check(CLI::ExistingFile);
  map_cmd
      ->add_option("--subjects", map_args.subjects,
                   "per-subject dumps (aggregated sampler)")
      ->check(CLI::ExistingFile);
  map_cmd->add_option("--design", map_args.design, "design JSON from fit")
      ->check(CLI::ExistingFile);
  map_cmd->add_option("--out", map_args.out, "output evidence volume (.nii)")
      ->required();
  map_cmd
      ->add_option("--sampler", map_args.opt.cfg.sampler, "trajectory sampler")
      ->transform(CLI::CheckedTransformer(sampler_values, CLI::ignore_case));
  map_cmd
      ->add_option("--base", map_args.opt.cfg.ag_base,
                   "base sampler for --sampler ag")
      ->transform(CLI::CheckedTransformer(base_values, CLI::ignore_case));
  map_cmd->add_option("--effect", map_args.opt.cfg.effect, "effect readout")
      ->transform(CLI::CheckedTransformer(effect_values, CLI::ignore_case));
  map_cmd->add_option("--rule", map_args.opt.cfg.rule, "positivity rule")
      ->transform(CLI::CheckedTransformer(rule_values, CLI::ignore_case));
  map_cmd
      ->add_option("--joint-rule", map_args.opt.cfg.joint_rule,
                   "joint positivity scope")
      ->transform(CLI::CheckedTransformer(joint_rule_values, CLI::ignore_case));
  map_cmd->add_option("--n-simu", map_args.opt.cfg.n_simu,
                      "Monte Carlo replicates");
  map_cmd->add_option("--seed", map_args.opt.cfg.seed, "RNG seed");
  map_cmd->add_option("--covariate", map_args.opt.cfg.covariate,
                      "covariate row (-1: first stimulus column)");
  map_cmd->add_option("--threshold", map_args.opt.threshold,
                      "evidence threshold for the binary mask");
  map_cmd->add_option("--workers", map_args.opt.workers,
                      "worker threads (0: MDLM_WORKERS or hardware)");

  std::vector<std::string> inspect_paths;
  CLI::App* inspect =
      app.add_subcommand("inspect", "print dump / volume / JSON headers");
  inspect->add_option("paths", inspect_paths, "files to describe")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (group->parsed()) return cmd_group(group_args);
    if (map_cmd->parsed()) return cmd_map(map_args);
    if (inspect->parsed()) return cmd_inspect(inspect_paths);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const mdlm::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const mdlm::ComputeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

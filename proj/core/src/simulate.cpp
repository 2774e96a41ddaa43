#include "mdlm/simulate.hpp"

#include <cmath>

#include "json.hpp"

#include "mdlm/errors.hpp"
#include "mdlm/rng.hpp"

namespace mdlm {

namespace {

// Stream tags: keep the subject-level streams (amplitude, shared noise) away
// from the per-voxel streams, which use tag = 2 + linear voxel index.
constexpr std::uint64_t kAmplitudeTag = 0;
constexpr std::uint64_t kSharedNoiseTag = 1;
constexpr std::uint64_t kVoxelTagBase = 2;

// Stationary unit-variance AR(1) series of iid normals.
void ar1_series(Rng& rng, double phi, std::vector<double>& out) {
  const double innov_sd = std::sqrt(1.0 - phi * phi);
  double prev = rng.normal();
  out[0] = prev;
  for (std::size_t t = 1; t < out.size(); ++t) {
    prev = phi * prev + innov_sd * rng.normal();
    out[t] = prev;
  }
}

}  // namespace

bool ActiveRegion::contains(const VoxelIndex& v) const {
  if (shape == Shape::box) {
    return v.x >= lo.x && v.x <= hi.x && v.y >= lo.y && v.y <= hi.y &&
           v.z >= lo.z && v.z <= hi.z;
  }
  const double dx = v.x - center.x;
  const double dy = v.y - center.y;
  const double dz = v.z - center.z;
  return dx * dx + dy * dy + dz * dz <= radius_vox * radius_vox;
}

void ActiveRegion::validate(const GridDims& dims) const {
  if (shape == Shape::box) {
    if (!dims.contains(lo) || !dims.contains(hi) || lo.x > hi.x ||
        lo.y > hi.y || lo.z > hi.z) {
      throw InputError("active box corners outside the volume or inverted");
    }
  } else {
    if (!dims.contains(center)) {
      throw InputError("active sphere center outside the volume");
    }
    if (!(radius_vox >= 0.0)) {
      throw InputError("active sphere radius must be non-negative");
    }
  }
}

void SimSpec::validate() const {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
    throw BadOption("simulation volume dimensions must be positive");
  }
  if (T <= 0) throw BadOption("simulation needs T > 0");
  if (tr_seconds <= 0.0) throw BadOption("tr_seconds must be positive");
  if (n_subjects <= 0) throw BadOption("n_subjects must be positive");
  if (!(noise_sd > 0.0)) throw BadOption("noise_sd must be positive");
  if (!(subject_amplitude_sd >= 0.0)) {
    throw BadOption("subject_amplitude_sd must be non-negative");
  }
  if (!(spatial_rho >= 0.0) || spatial_rho >= 1.0) {
    throw BadOption("spatial_rho must lie in [0, 1)");
  }
  if (std::abs(temporal_ar1) >= 1.0) {
    throw BadOption("temporal_ar1 must lie in (-1, 1)");
  }
  for (const StimulusTrack& track : tracks) track.validate();
  region.validate(dims);
}

SimOutput simulate_group(const SimSpec& spec) {
  spec.validate();
  SimOutput out;

  // Noise-free response shape: the (peak-normalized) convolved regressor of
  // the first track; zero when no timing is given.
  out.regressor.assign(static_cast<std::size_t>(spec.T), 0.0);
  if (!spec.tracks.empty()) {
    StimulusTrack track = spec.tracks.front();
    track.normalize();
    const std::vector<double> box =
        boxcar(track, spec.tr_seconds, spec.T, spec.oversample);
    out.regressor =
        hrf_convolve(box, spec.hrf, spec.tr_seconds, spec.oversample);
  }

  out.truth = Volume4D::zeros(spec.dims, 1);
  out.truth.voxel_mm = spec.voxel_mm;
  const std::size_t n_vox = spec.dims.count();
  for (std::size_t i = 0; i < n_vox; ++i) {
    if (spec.region.contains(spec.dims.unlinear(i))) {
      out.truth.data[i] = 1.0f;
    }
  }

  const double shared_w = std::sqrt(spec.spatial_rho);
  const double own_w = std::sqrt(1.0 - spec.spatial_rho);
  std::vector<double> shared(static_cast<std::size_t>(spec.T));
  std::vector<double> own(static_cast<std::size_t>(spec.T));
  out.subjects.reserve(static_cast<std::size_t>(spec.n_subjects));
  out.amplitudes.reserve(static_cast<std::size_t>(spec.n_subjects));
  for (int z = 0; z < spec.n_subjects; ++z) {
    const std::uint64_t zi = static_cast<std::uint64_t>(z);
    Rng amp_rng(spec.seed, zi, kAmplitudeTag, 1);
    const double amplitude =
        spec.amplitude + spec.subject_amplitude_sd * amp_rng.normal();
    out.amplitudes.push_back(amplitude);

    Rng shared_rng(spec.seed, zi, kSharedNoiseTag, 1);
    ar1_series(shared_rng, spec.temporal_ar1, shared);

    Volume4D bold = Volume4D::zeros(spec.dims, spec.T);
    bold.voxel_mm = spec.voxel_mm;
    bold.tr_seconds = spec.tr_seconds;
    for (std::size_t v = 0; v < n_vox; ++v) {
      Rng vox_rng(spec.seed, zi, kVoxelTagBase + v, 1);
      ar1_series(vox_rng, spec.temporal_ar1, own);
      const bool active = out.truth.data[v] != 0.0f;
      for (int t = 0; t < spec.T; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        double value =
            spec.noise_sd * (shared_w * shared[ti] + own_w * own[ti]);
        if (active) value += amplitude * out.regressor[ti];
        bold.data[v + n_vox * ti] = static_cast<float>(value);
      }
    }
    out.subjects.push_back(std::move(bold));
  }
  return out;
}

SimSpec sim_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("simulation spec: ") + e.what());
  }
  SimSpec spec;
  try {
    if (j.contains("dims")) {
      spec.dims = {j["dims"].at(0).get<int>(), j["dims"].at(1).get<int>(),
                   j["dims"].at(2).get<int>()};
    }
    spec.T = j.value("n_scans", spec.T);
    spec.tr_seconds = j.value("tr_seconds", spec.tr_seconds);
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.amplitude = j.value("amplitude", spec.amplitude);
    spec.subject_amplitude_sd =
        j.value("subject_amplitude_sd", spec.subject_amplitude_sd);
    spec.noise_sd = j.value("noise_sd", spec.noise_sd);
    spec.spatial_rho = j.value("spatial_rho", spec.spatial_rho);
    spec.temporal_ar1 = j.value("temporal_ar1", spec.temporal_ar1);
    spec.seed = j.value("seed", spec.seed);
    spec.oversample = j.value("oversample", spec.oversample);
    if (j.contains("voxel_mm")) {
      spec.voxel_mm = {j["voxel_mm"].at(0).get<double>(),
                       j["voxel_mm"].at(1).get<double>(),
                       j["voxel_mm"].at(2).get<double>()};
    }
    if (j.contains("tracks")) {
      for (const auto& jt : j["tracks"]) {
        StimulusTrack track;
        track.label = jt.value("label", std::string("stimulus"));
        track.onsets = jt.at("onsets").get<std::vector<double>>();
        track.durations = jt.at("durations").get<std::vector<double>>();
        spec.tracks.push_back(std::move(track));
      }
    }
    if (j.contains("region")) {
      const auto& jr = j["region"];
      const std::string shape = jr.value("shape", std::string("sphere"));
      if (shape == "box") {
        spec.region.shape = ActiveRegion::Shape::box;
        spec.region.lo = {jr.at("lo").at(0).get<int>(),
                          jr.at("lo").at(1).get<int>(),
                          jr.at("lo").at(2).get<int>()};
        spec.region.hi = {jr.at("hi").at(0).get<int>(),
                          jr.at("hi").at(1).get<int>(),
                          jr.at("hi").at(2).get<int>()};
      } else if (shape == "sphere") {
        spec.region.shape = ActiveRegion::Shape::sphere;
        spec.region.center = {jr.at("center").at(0).get<int>(),
                              jr.at("center").at(1).get<int>(),
                              jr.at("center").at(2).get<int>()};
        spec.region.radius_vox = jr.at("radius_vox").get<double>();
      } else {
        throw InputError("simulation spec: region shape '" + shape +
                         "' not in {box, sphere}");
      }
    } else {
      // Default: centered sphere covering about an eighth of the short axis.
      spec.region.shape = ActiveRegion::Shape::sphere;
      spec.region.center = {spec.dims.nx / 2, spec.dims.ny / 2, spec.dims.nz / 2};
      spec.region.radius_vox = 1.5;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("simulation spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string sim_spec_to_json(const SimSpec& spec) {
  nlohmann::json j;
  j["dims"] = {spec.dims.nx, spec.dims.ny, spec.dims.nz};
  j["n_scans"] = spec.T;
  j["tr_seconds"] = spec.tr_seconds;
  j["n_subjects"] = spec.n_subjects;
  j["amplitude"] = spec.amplitude;
  j["subject_amplitude_sd"] = spec.subject_amplitude_sd;
  j["noise_sd"] = spec.noise_sd;
  j["spatial_rho"] = spec.spatial_rho;
  j["temporal_ar1"] = spec.temporal_ar1;
  j["seed"] = spec.seed;
  j["oversample"] = spec.oversample;
  j["voxel_mm"] = {spec.voxel_mm[0], spec.voxel_mm[1], spec.voxel_mm[2]};
  nlohmann::json tracks = nlohmann::json::array();
  for (const StimulusTrack& track : spec.tracks) {
    tracks.push_back({{"label", track.label},
                      {"onsets", track.onsets},
                      {"durations", track.durations}});
  }
  j["tracks"] = tracks;
  nlohmann::json region;
  if (spec.region.shape == ActiveRegion::Shape::box) {
    region["shape"] = "box";
    region["lo"] = {spec.region.lo.x, spec.region.lo.y, spec.region.lo.z};
    region["hi"] = {spec.region.hi.x, spec.region.hi.y, spec.region.hi.z};
  } else {
    region["shape"] = "sphere";
    region["center"] = {spec.region.center.x, spec.region.center.y,
                        spec.region.center.z};
    region["radius_vox"] = spec.region.radius_vox;
  }
  j["region"] = region;
  return j.dump(2);
}

}  // namespace mdlm

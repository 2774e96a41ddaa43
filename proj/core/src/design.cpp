#include "mdlm/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

#include "mdlm/errors.hpp"

namespace mdlm {

namespace {

// Unnormalized would do, but keeping the true pdf makes the kernel's scale
// meaningful on its own.
double gamma_pdf(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(t) - t / scale -
                  std::lgamma(shape) - shape * std::log(scale));
}

}  // namespace

void StimulusTrack::normalize() {
  validate();
  std::vector<std::size_t> order(onsets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return onsets[a] < onsets[b];
  });
  std::vector<double> on, dur;
  on.reserve(onsets.size());
  dur.reserve(onsets.size());
  for (std::size_t i : order) {
    if (!on.empty() && onsets[i] == on.back()) {
      dur.back() = std::max(dur.back(), durations[i]);  // collapse duplicates
    } else {
      on.push_back(onsets[i]);
      dur.push_back(durations[i]);
    }
  }
  onsets = std::move(on);
  durations = std::move(dur);
}

void StimulusTrack::validate() const {
  if (onsets.size() != durations.size()) {
    throw DimensionMismatch("track '" + label + "': " +
                            std::to_string(onsets.size()) + " onsets vs " +
                            std::to_string(durations.size()) + " durations");
  }
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    if (!(onsets[i] >= 0.0) || !(durations[i] >= 0.0)) {
      throw InputError("track '" + label + "': negative onset or duration at event " +
                       std::to_string(i));
    }
  }
}

int DesignMatrix::first_stimulus_column() const {
  if (p() == 0) throw InputError("design has no columns");
  if (has_intercept && p() == 1) {
    throw InputError("design has only an intercept; no stimulus column");
  }
  return has_intercept ? 1 : 0;
}

std::vector<double> boxcar(const StimulusTrack& track, double tr_seconds,
                           int n_scans, int oversample) {
  if (tr_seconds <= 0.0) throw BadOption("tr_seconds must be positive");
  if (n_scans <= 0) throw BadOption("n_scans must be positive");
  if (oversample <= 0) throw BadOption("oversample must be positive");
  track.validate();
  const double dt = tr_seconds / oversample;
  const double window = n_scans * tr_seconds;
  const std::size_t n = static_cast<std::size_t>(n_scans) *
                        static_cast<std::size_t>(oversample);
  std::vector<double> out(n, 0.0);
  for (std::size_t e = 0; e < track.onsets.size(); ++e) {
    const double onset = track.onsets[e];
    double end = onset + track.durations[e];
    if (onset >= window) {
      warn("track '" + track.label + "': event at " + std::to_string(onset) +
           " s starts past the " + std::to_string(window) +
           " s scan window; dropped");
      continue;
    }
    if (end > window) {
      warn("track '" + track.label + "': event at " + std::to_string(onset) +
           " s extends past the " + std::to_string(window) +
           " s scan window; truncated");
      end = window;
    }
    // Point-sample: grid time i*dt is on when onset <= t < end.
    std::size_t lo = static_cast<std::size_t>(std::ceil(onset / dt - 1e-12));
    for (std::size_t i = lo; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      if (t >= end) break;
      out[i] = 1.0;
    }
  }
  return out;
}

std::vector<double> hrf_kernel(const HrfParams& hrf, double dt) {
  if (dt <= 0.0) throw BadOption("hrf kernel spacing must be positive");
  if (hrf.length <= 0.0) throw BadOption("hrf length must be positive");
  const std::size_t n = static_cast<std::size_t>(std::floor(hrf.length / dt)) + 1;
  std::vector<double> h(n);
  const double peak_shape = hrf.peak_delay / hrf.peak_disp;
  const double under_shape = hrf.undershoot_delay / hrf.undershoot_disp;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    h[i] = gamma_pdf(t, peak_shape, hrf.peak_disp) -
           hrf.undershoot_ratio * gamma_pdf(t, under_shape, hrf.undershoot_disp);
  }
  return h;
}

std::vector<double> hrf_convolve(const std::vector<double>& oversampled,
                                 const HrfParams& hrf, double tr_seconds,
                                 int oversample, bool normalize) {
  if (tr_seconds <= 0.0) throw BadOption("tr_seconds must be positive");
  if (oversample <= 0) throw BadOption("oversample must be positive");
  if (oversampled.size() % static_cast<std::size_t>(oversample) != 0) {
    throw DimensionMismatch("oversampled signal length not a multiple of the "
                            "oversampling factor");
  }
  const double dt = tr_seconds / oversample;
  const std::vector<double> h = hrf_kernel(hrf, dt);
  const std::size_t n = oversampled.size();
  // Truncated convolution on the fine grid, then sample at scan onsets.
  std::vector<double> conv(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kmax = std::min(i + 1, h.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) acc += h[k] * oversampled[i - k];
    conv[i] = acc * dt;
  }
  const std::size_t n_scans = n / static_cast<std::size_t>(oversample);
  std::vector<double> out(n_scans);
  for (std::size_t s = 0; s < n_scans; ++s) {
    out[s] = conv[s * static_cast<std::size_t>(oversample)];
  }
  if (normalize) {
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
      for (double& v : out) v /= peak;
    }
  }
  return out;
}

DesignMatrix assemble_design(const DesignSpec& spec) {
  if (spec.n_scans <= 0) throw BadOption("design needs n_scans > 0");
  const int p = static_cast<int>(spec.tracks.size()) +
                (spec.include_intercept ? 1 : 0);
  if (p == 0) throw InputError("design has no columns");
  DesignMatrix design;
  design.has_intercept = spec.include_intercept;
  design.columns.resize(spec.n_scans, p);
  int col = 0;
  if (spec.include_intercept) {
    design.names.emplace_back("intercept");
    design.columns.col(col++).setOnes();
  }
  for (const StimulusTrack& track : spec.tracks) {
    StimulusTrack norm = track;
    norm.normalize();
    const std::vector<double> box =
        boxcar(norm, spec.tr_seconds, spec.n_scans, spec.oversample);
    const std::vector<double> reg =
        hrf_convolve(box, spec.hrf, spec.tr_seconds, spec.oversample);
    design.names.push_back(track.label);
    for (int t = 0; t < spec.n_scans; ++t) {
      design.columns(t, col) = reg[static_cast<std::size_t>(t)];
    }
    ++col;
  }
  return design;
}

std::string design_to_json(const DesignMatrix& design) {
  nlohmann::json j;
  j["names"] = design.names;
  j["has_intercept"] = design.has_intercept;
  j["n_scans"] = design.T();
  nlohmann::json cols = nlohmann::json::array();
  for (int c = 0; c < design.p(); ++c) {
    std::vector<double> v(design.columns.col(c).data(),
                          design.columns.col(c).data() + design.T());
    cols.push_back(v);
  }
  j["columns"] = cols;
  return j.dump(2);
}

DesignMatrix design_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("design json: ") + e.what());
  }
  DesignMatrix design;
  try {
    design.names = j.at("names").get<std::vector<std::string>>();
    design.has_intercept = j.at("has_intercept").get<bool>();
    const int T = j.at("n_scans").get<int>();
    const auto& cols = j.at("columns");
    const int p = static_cast<int>(cols.size());
    if (p != static_cast<int>(design.names.size())) {
      throw InputError("design json: names/columns count mismatch");
    }
    if (T <= 0 || p == 0) throw InputError("design json: empty design");
    design.columns.resize(T, p);
    for (int c = 0; c < p; ++c) {
      const auto v = cols.at(c).get<std::vector<double>>();
      if (static_cast<int>(v.size()) != T) {
        throw InputError("design json: column " + std::to_string(c) +
                         " has wrong length");
      }
      for (int t = 0; t < T; ++t) design.columns(t, c) = v[static_cast<std::size_t>(t)];
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("design json: ") + e.what());
  }
  return design;
}

}  // namespace mdlm

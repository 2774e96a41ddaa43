#pragma once

#include <string>
#include <vector>

#include "mdlm/linalg.hpp"

// Stimulus timing and design matrices.  Timing lives on an oversampled grid
// (default 16 points per TR); regressors are the boxcar convolved with a
// canonical double-gamma HRF, downsampled to scan onsets and peak-normalized
// so a unit-amplitude block has regressor max 1.

namespace mdlm {

struct StimulusTrack {
  std::string label;
  std::vector<double> onsets;     // seconds
  std::vector<double> durations;  // seconds, same length as onsets

  // Sorts events by onset, collapses duplicate onsets (keeping the longer
  // duration), and rejects negative times.
  void normalize();
  void validate() const;
};

struct HrfParams {
  double peak_delay = 6.0;        // gamma shape (dispersion 1): mode at 5 s
  double peak_disp = 1.0;
  double undershoot_delay = 16.0;
  double undershoot_disp = 1.0;
  double undershoot_ratio = 1.0 / 6.0;
  double length = 32.0;           // kernel support in seconds
};

struct DesignSpec {
  std::vector<StimulusTrack> tracks;
  double tr_seconds = 2.0;
  int n_scans = 0;
  HrfParams hrf;
  bool include_intercept = true;
  int oversample = 16;
};

struct DesignMatrix {
  std::vector<std::string> names;  // column names, "intercept" first if present
  Matrix columns;                  // T x p
  bool has_intercept = false;

  int T() const { return static_cast<int>(columns.rows()); }
  int p() const { return static_cast<int>(columns.cols()); }
  Vector row(int t) const { return columns.row(t).transpose(); }
  // Index of the first non-intercept column; the default covariate of
  // interest.
  int first_stimulus_column() const;
};

// Indicator of stimulus-on, sampled at tr/oversample.  Events that start
// past the scan window are dropped and events extending past it are clipped,
// both with a warning.
std::vector<double> boxcar(const StimulusTrack& track, double tr_seconds,
                           int n_scans, int oversample);

// Double-gamma kernel sampled at spacing dt over [0, length].
std::vector<double> hrf_kernel(const HrfParams& hrf, double dt);

// Convolves an oversampled signal with the HRF, downsamples to scan onsets.
// With normalize the regressor is scaled by its peak absolute value; the raw
// path is exact convolution, useful for checking linearity.
std::vector<double> hrf_convolve(const std::vector<double>& oversampled,
                                 const HrfParams& hrf, double tr_seconds,
                                 int oversample, bool normalize = true);

DesignMatrix assemble_design(const DesignSpec& spec);

// JSON round-trip of an assembled design (column names + values), the
// hand-off format between fitting and sampling runs.
std::string design_to_json(const DesignMatrix& design);
DesignMatrix design_from_json(const std::string& text);

}  // namespace mdlm

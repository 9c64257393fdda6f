// Copyright 2026 The RetroLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retrolens/audio/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::audio {
namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface
// is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Autocorrelator {
 public:
  explicit Autocorrelator(std::size_t window) : window_(window) {
    size_ = 1;
    while (size_ < 2 * window) size_ <<= 1;
    time_ = fftw_alloc_real(size_);
    freq_ = fftw_alloc_complex(size_ / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), time_, freq_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), freq_, time_, FFTW_ESTIMATE);
  }
  ~Autocorrelator() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(time_);
    fftw_free(freq_);
  }
  Autocorrelator(const Autocorrelator&) = delete;
  Autocorrelator& operator=(const Autocorrelator&) = delete;

  // Linear (not circular) autocorrelation sums for lags [0, max_lag].
  void compute(std::span<const double> frame, std::size_t max_lag, std::vector<double>& out) {
    std::fill(time_, time_ + size_, 0.0);
    std::copy(frame.begin(), frame.end(), time_);
    fftw_execute_dft_r2c(forward_, time_, freq_);
    for (std::size_t k = 0; k < size_ / 2 + 1; ++k) {
      const double re = freq_[k][0], im = freq_[k][1];
      freq_[k][0] = re * re + im * im;
      freq_[k][1] = 0.0;
    }
    fftw_execute_dft_c2r(backward_, freq_, time_);
    out.resize(max_lag + 1);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) out[lag] = time_[lag] * scale;
  }

  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::size_t size_;
  double* time_;
  fftw_complex* freq_;
  fftw_plan forward_;
  fftw_plan backward_;
};

void check_input(std::span<const float> samples, int sample_rate) {
  if (sample_rate < 16000) throw Error(ErrorCode::kPrecondition, "sample rate must be at least 16000 Hz");
  if (samples.empty()) throw Error(ErrorCode::kEmptyAudio, "no samples");
}

double level_db(double mean_square, double clamp_db) {
  if (mean_square <= 0.0) return clamp_db;
  return std::clamp(10.0 * std::log10(mean_square), clamp_db, 0.0);
}

std::size_t hop_samples(int sample_rate, double ms) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_rate * ms / 1000.0)));
}

// Level of consecutive non-overlapping `hop`-sample frames.
std::vector<double> frame_levels(std::span<const float> samples, std::size_t hop, double clamp_db) {
  const std::size_t n = (samples.size() + hop - 1) / hop;
  std::vector<double> out(n);
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t b = f * hop, e = std::min(samples.size(), b + hop);
    double ss = 0.0;
    for (std::size_t i = b; i < e; ++i) ss += static_cast<double>(samples[i]) * samples[i];
    out[f] = level_db(ss / static_cast<double>(e - b), clamp_db);
  }
  return out;
}

// Hann-weighted intensity contour; frame k is centred at (k + 0.5) * hop.
std::vector<double> intensity_contour(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  const std::size_t hop = hop_samples(sample_rate, config.intensity_hop_ms);
  const std::size_t win = hop_samples(sample_rate, config.intensity_window_ms);
  std::vector<double> hann(win);
  for (std::size_t i = 0; i < win; ++i)
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(win));
  const std::size_t n = (samples.size() + hop - 1) / hop;
  std::vector<double> out(n);
  const auto half = static_cast<std::ptrdiff_t>(win / 2);
  for (std::size_t k = 0; k < n; ++k) {
    const auto centre = static_cast<std::ptrdiff_t>(k * hop + hop / 2);
    double ss = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
      const std::ptrdiff_t idx = centre - half + static_cast<std::ptrdiff_t>(i);
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(samples.size())) continue;
      const double s = samples[static_cast<std::size_t>(idx)];
      ss += hann[i] * s * s;
      wsum += hann[i];
    }
    out[k] = level_db(wsum > 0.0 ? ss / wsum : 0.0, config.clamp_db);
  }
  return out;
}

std::size_t seconds_of(std::size_t n_samples, int sample_rate) {
  return (n_samples + static_cast<std::size_t>(sample_rate) - 1) / static_cast<std::size_t>(sample_rate);
}

}  // namespace

AudioConfig AudioConfig::from_config(const Config& config) {
  AudioConfig c;
  c.pitch_min_hz = config.get_double("audio.pitch_min_hz", c.pitch_min_hz);
  c.pitch_max_hz = config.get_double("audio.pitch_max_hz", c.pitch_max_hz);
  c.voicing_threshold = config.get_double("audio.voicing_threshold", c.voicing_threshold);
  c.silence_floor_db = config.get_double("audio.silence_floor_db", c.silence_floor_db);
  c.min_pause_ms = config.get_double("audio.min_pause_ms", c.min_pause_ms);
  if (!(c.pitch_min_hz > 0 && c.pitch_min_hz < c.pitch_max_hz))
    throw Error(ErrorCode::kValidation, "audio.pitch_min_hz must be positive and below audio.pitch_max_hz");
  return c;
}

std::vector<double> compute_volume(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  check_input(samples, sample_rate);
  return frame_levels(samples, static_cast<std::size_t>(sample_rate), config.clamp_db);
}

std::vector<double> pitch_track(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  check_input(samples, sample_rate);
  const std::size_t hop = hop_samples(sample_rate, config.frame_hop_ms);
  const auto min_lag = static_cast<std::size_t>(std::floor(sample_rate / config.pitch_max_hz));
  const auto max_lag = static_cast<std::size_t>(std::ceil(sample_rate / config.pitch_min_hz));
  const std::size_t n_frames = (samples.size() + hop - 1) / hop;
  std::vector<double> track(n_frames, 0.0);
  Autocorrelator ac(hop);
  std::vector<double> frame, acf, energy_prefix;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t b = f * hop, e = std::min(samples.size(), b + hop);
    const std::size_t w = e - b;
    // Need at least two periods of the lowest pitch inside the frame.
    if (w < 2 * max_lag + 2) continue;
    frame.assign(samples.begin() + static_cast<std::ptrdiff_t>(b), samples.begin() + static_cast<std::ptrdiff_t>(e));
    double mu = 0.0;
    for (double v : frame) mu += v;
    mu /= static_cast<double>(w);
    double ms = 0.0;
    for (double& v : frame) {
      v -= mu;
      ms += v * v;
    }
    if (level_db(ms / static_cast<double>(w), config.clamp_db) <= config.silence_floor_db) continue;

    ac.compute(frame, max_lag + 1, acf);
    energy_prefix.assign(w + 1, 0.0);
    for (std::size_t i = 0; i < w; ++i) energy_prefix[i + 1] = energy_prefix[i] + frame[i] * frame[i];
    auto normalized = [&](std::size_t lag) {
      // Energies of the two overlapping pieces x[0, w-lag) and x[lag, w).
      const double e0 = energy_prefix[w - lag];
      const double e1 = energy_prefix[w] - energy_prefix[lag];
      const double denom = std::sqrt(e0 * e1);
      return denom > 0.0 ? acf[lag] / denom : 0.0;
    };
    std::vector<double> r(max_lag + 2, 0.0);
    for (std::size_t lag = std::max<std::size_t>(1, min_lag - 1); lag <= max_lag + 1; ++lag) r[lag] = normalized(lag);

    double best = -1.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag)
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) best = std::max(best, r[lag]);
    if (best < config.voicing_threshold) continue;
    // Smallest-lag peak close to the best one, which avoids octave-down errors.
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (!(r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) || r[lag] < 0.9 * best) continue;
      const double a = r[lag - 1], c = r[lag], d = r[lag + 1];
      const double curvature = a - 2.0 * c + d;
      const double delta = curvature < 0.0 ? 0.5 * (a - d) / curvature : 0.0;
      const double hz = sample_rate / (static_cast<double>(lag) + delta);
      if (hz >= config.pitch_min_hz && hz <= config.pitch_max_hz) track[f] = hz;
      break;
    }
  }
  return track;
}

std::vector<double> compute_pitch(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  const std::vector<double> track = pitch_track(samples, sample_rate, config);
  const std::size_t hop = hop_samples(sample_rate, config.frame_hop_ms);
  std::vector<std::vector<double>> voiced(seconds_of(samples.size(), sample_rate));
  for (std::size_t f = 0; f < track.size(); ++f) {
    if (track[f] <= 0.0) continue;
    const std::size_t second = f * hop / static_cast<std::size_t>(sample_rate);
    voiced[second].push_back(track[f]);
  }
  std::vector<double> out(voiced.size(), 0.0);
  for (std::size_t s = 0; s < voiced.size(); ++s)
    if (!voiced[s].empty()) out[s] = median(std::move(voiced[s]));
  return out;
}

std::vector<Pause> detect_pauses(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  std::vector<Pause> pauses;
  if (samples.empty() || sample_rate <= 0) return pauses;
  const std::size_t hop = hop_samples(sample_rate, config.intensity_hop_ms);
  const std::vector<double> level = frame_levels(samples, hop, config.clamp_db);
  auto to_ms = [&](std::size_t sample) {
    return static_cast<corpus::SessionMs>(std::llround(1000.0 * static_cast<double>(sample) / sample_rate));
  };
  std::size_t f = 0;
  while (f < level.size()) {
    if (level[f] >= config.silence_floor_db) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g < level.size() && level[g] < config.silence_floor_db) ++g;
    const Pause p{to_ms(f * hop), to_ms(std::min(samples.size(), g * hop))};
    if (static_cast<double>(p.duration_ms()) >= config.min_pause_ms) pauses.push_back(p);
    f = g;
  }
  return pauses;
}

std::vector<double> syllable_nuclei(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  std::vector<double> nuclei;
  if (samples.empty() || sample_rate < 16000) return nuclei;
  const std::vector<double> intensity = intensity_contour(samples, sample_rate, config);
  const std::vector<double> track = pitch_track(samples, sample_rate, config);
  const std::vector<Pause> pauses = detect_pauses(samples, sample_rate, config);
  const double hop_s = config.intensity_hop_ms / 1000.0;
  const double pitch_hop_s = config.frame_hop_ms / 1000.0;

  std::vector<char> eligible(intensity.size(), 0);
  std::size_t pause_idx = 0;
  std::vector<double> voiced_levels;
  for (std::size_t k = 0; k < intensity.size(); ++k) {
    const double t = (static_cast<double>(k) + 0.5) * hop_s;
    const auto pf = static_cast<std::size_t>(t / pitch_hop_s);
    const bool voiced = pf < track.size() && track[pf] > 0.0;
    const double t_ms = t * 1000.0;
    while (pause_idx < pauses.size() && static_cast<double>(pauses[pause_idx].end_ms) <= t_ms) ++pause_idx;
    const bool in_pause = pause_idx < pauses.size() && static_cast<double>(pauses[pause_idx].start_ms) <= t_ms;
    if (voiced && !in_pause) {
      eligible[k] = 1;
      voiced_levels.push_back(intensity[k]);
    }
  }
  if (voiced_levels.empty()) return nuclei;
  const double threshold = median(voiced_levels);

  // Walk candidate peaks; a new nucleus needs the contour to have dipped at
  // least min_dip_db below it since the previous nucleus. Otherwise the two
  // merge and the higher peak is kept.
  std::vector<std::size_t> kept;
  for (std::size_t k = 1; k + 1 < intensity.size(); ++k) {
    if (!eligible[k] || intensity[k] < threshold) continue;
    if (!(intensity[k] > intensity[k - 1] && intensity[k] >= intensity[k + 1])) continue;
    if (kept.empty()) {
      kept.push_back(k);
      continue;
    }
    const std::size_t prev = kept.back();
    const double dip = *std::min_element(intensity.begin() + static_cast<std::ptrdiff_t>(prev),
                                         intensity.begin() + static_cast<std::ptrdiff_t>(k) + 1);
    if (intensity[k] - dip >= config.min_dip_db) {
      kept.push_back(k);
    } else if (intensity[k] > intensity[prev]) {
      kept.back() = k;
    }
  }
  for (std::size_t k : kept) nuclei.push_back((static_cast<double>(k) + 0.5) * hop_s);
  return nuclei;
}

std::vector<double> compute_speech_rate(std::span<const float> samples, int sample_rate, const AudioConfig& config) {
  if (samples.empty() || sample_rate <= 0) return {};
  std::vector<double> rate(seconds_of(samples.size(), sample_rate), 0.0);
  for (double t : syllable_nuclei(samples, sample_rate, config)) {
    const auto s = static_cast<std::size_t>(t);
    if (s < rate.size()) rate[s] += 1.0;
  }
  return rate;
}

AudioFeatureSeries extract_audio_features(const corpus::AudioBuffer& audio, const AudioConfig& config) {
  AudioFeatureSeries out;
  std::span<const float> samples(audio.samples);
  out.volume_db = compute_volume(samples, audio.sample_rate, config);
  out.pitch_hz = compute_pitch(samples, audio.sample_rate, config);
  out.pauses = detect_pauses(samples, audio.sample_rate, config);
  out.speech_rate = compute_speech_rate(samples, audio.sample_rate, config);
  return out;
}

std::vector<double> pause_seconds_per_second(const std::vector<Pause>& pauses, std::size_t seconds) {
  std::vector<double> out(seconds, 0.0);
  for (const auto& p : pauses) {
    for (auto s = p.start_ms / 1000; s * 1000 < p.end_ms && static_cast<std::size_t>(s) < seconds; ++s) {
      const auto lo = std::max(p.start_ms, s * 1000);
      const auto hi = std::min(p.end_ms, (s + 1) * 1000);
      if (hi > lo) out[static_cast<std::size_t>(s)] += static_cast<double>(hi - lo) / 1000.0;
    }
  }
  return out;
}

FiveNumber five_number(std::vector<double> values) {
  FiveNumber f;
  f.count = values.size();
  if (values.empty()) return f;
  std::sort(values.begin(), values.end());
  f.min = values.front();
  f.q1 = quantile_sorted(values, 0.25);
  f.median = quantile_sorted(values, 0.5);
  f.q3 = quantile_sorted(values, 0.75);
  f.max = values.back();
  return f;
}

std::vector<FiveNumber> boxstats_per_minute(std::span<const double> per_second, bool exclude_zeros) {
  std::vector<FiveNumber> out;
  for (std::size_t b = 0; b < per_second.size(); b += 60) {
    std::vector<double> block;
    for (std::size_t i = b; i < std::min(per_second.size(), b + 60); ++i)
      if (!exclude_zeros || per_second[i] != 0.0) block.push_back(per_second[i]);
    out.push_back(five_number(std::move(block)));
  }
  return out;
}

}  // namespace retrolens::audio

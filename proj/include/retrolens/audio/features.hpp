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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "retrolens/config.hpp"
#include "retrolens/corpus/types.hpp"

namespace retrolens::audio {

// Praat-style speech defaults. Every threshold is exposed through the
// `audio.*` config keys.
struct AudioConfig {
  double pitch_min_hz = 75.0;
  double pitch_max_hz = 500.0;
  double voicing_threshold = 0.45;
  double silence_floor_db = -40.0;
  double min_pause_ms = 300.0;
  double frame_hop_ms = 100.0;
  // Finer contour for pause boundaries and syllable nuclei.
  double intensity_hop_ms = 10.0;
  double intensity_window_ms = 40.0;
  double min_dip_db = 2.0;
  double clamp_db = -80.0;

  static AudioConfig from_config(const Config& config);
};

struct Pause {
  corpus::SessionMs start_ms = 0;
  corpus::SessionMs end_ms = 0;
  corpus::SessionMs duration_ms() const { return end_ms - start_ms; }
  friend bool operator==(const Pause&, const Pause&) = default;
};

// Per-second series; index k covers [k s, k+1 s).
struct AudioFeatureSeries {
  std::vector<double> volume_db;
  std::vector<double> pitch_hz;  // 0 = unvoiced
  std::vector<double> speech_rate;
  std::vector<Pause> pauses;
};

// RMS level of each second in dBFS, clamped below at config.clamp_db.
std::vector<double> compute_volume(std::span<const float> samples, int sample_rate, const AudioConfig& config = {});

// Normalized-autocorrelation pitch per frame_hop frame; the per-second value is
// the median over voiced frames, 0 when none.
std::vector<double> compute_pitch(std::span<const float> samples, int sample_rate, const AudioConfig& config = {});

// Frame-level pitch track (one value per frame_hop frame).
std::vector<double> pitch_track(std::span<const float> samples, int sample_rate, const AudioConfig& config = {});

// Maximal quiet runs (level below silence_floor_db) lasting at least min_pause_ms.
std::vector<Pause> detect_pauses(std::span<const float> samples, int sample_rate, const AudioConfig& config = {});

// Syllable nuclei per second.
std::vector<double> compute_speech_rate(std::span<const float> samples, int sample_rate,
                                        const AudioConfig& config = {});

// Syllable nucleus times in seconds; exposed so tests can inspect placement.
std::vector<double> syllable_nuclei(std::span<const float> samples, int sample_rate, const AudioConfig& config = {});

AudioFeatureSeries extract_audio_features(const corpus::AudioBuffer& audio, const AudioConfig& config = {});

// Seconds of each whole second covered by a pause.
std::vector<double> pause_seconds_per_second(const std::vector<Pause>& pauses, std::size_t seconds);

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::size_t count = 0;
  friend bool operator==(const FiveNumber&, const FiveNumber&) = default;
};

FiveNumber five_number(std::vector<double> values);

// Five-number summary for each 60-sample block; a partial last block is
// summarized over what it has. With exclude_zeros, zero samples (unvoiced
// pitch) are left out; an all-excluded block reports count 0.
std::vector<FiveNumber> boxstats_per_minute(std::span<const double> per_second, bool exclude_zeros = false);

}  // namespace retrolens::audio

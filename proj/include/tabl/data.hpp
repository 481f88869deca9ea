#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tabl/matrix.hpp"

namespace tabl {

constexpr int kFeatureDim = 144;
constexpr int kLobDim = 40;      // first 40 dims: prices/volumes of 10 levels
constexpr int kHistorySteps = 10;
constexpr std::array<int, 5> kHorizons{10, 20, 30, 50, 100};

/// Index into kHorizons; throws for an unsupported horizon.
int horizon_index(int horizon);

/// One FI-2010 record: 144 z-score-normalized features plus a movement
/// label per horizon. Labels use the dataset convention
/// 1 = increase, 2 = stationary, 3 = decrease.
struct FeatureVector {
  std::array<double, kFeatureDim> values{};
  std::array<int, 5> labels{};
};

struct Day {
  std::vector<FeatureVector> events;
};

struct Dataset {
  std::vector<Day> days;
  long total_vectors() const;
};

/// One training sample: 40x10 window (columns oldest -> newest) plus the
/// movement class for the chosen horizon, remapped to 0 = increase,
/// 1 = stationary, 2 = decrease.
struct SampleWindow {
  Matrix x;
  int label;
};

int to_internal_label(int dataset_label);

/// Eq. midpoint of best ask and best bid. A crossed book (ask < bid) is
/// tolerated; such orders execute immediately in a real book.
double mid_price(double best_ask, double best_bid);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Loads whitespace-separated numeric text. `path` may be a single file
/// (one day) or a directory whose files, sorted by name, are the days.
/// Each record holds 149 values (144 features + 5 labels); orientation
/// (records as rows vs columns) is auto-detected by which dimension is 149.
Dataset load_fi2010(const std::string& path);

/// Binary day cache with a versioned header, to skip re-parsing ~450k
/// vectors on every run.
void save_cache(const Dataset& ds, const std::string& path);
Dataset load_cache(const std::string& path);

/// Sliding windows of 10 consecutive vectors (stride configurable, default
/// 1), never crossing a day boundary. Label comes from the newest vector.
std::vector<SampleWindow> build_windows(const Day& day, int horizon,
                                        int stride = 1);

std::array<long, 3> class_counts(const std::vector<SampleWindow>& windows);

/// Setup 1: anchored fold k trains on days 1..k, tests on day k+1.
/// Setup 2: trains on days 1-7, tests on days 8-10.
struct SplitPlan {
  int setup = 2;
  int fold = 1;  // 1..9, Setup 1 only
};

struct Split {
  std::vector<int> train_days;
  std::vector<int> test_days;
};

Split make_split(const Dataset& ds, const SplitPlan& plan);

std::vector<SampleWindow> windows_for_days(const Dataset& ds,
                                           const std::vector<int>& days,
                                           int horizon, int stride = 1);

/// Synthetic LOB generator. Random-walk mode builds plausible price/volume
/// columns around a drifting mid-price and labels by thresholding the mean
/// future mid-price change. Separable mode plants the class signal in the
/// newest vector only, so a linear classifier can reach 100%.
struct SynthConfig {
  uint64_t seed = 1;
  int n_days = 2;
  int vectors_per_day = 1000;
  bool separable = false;
  double threshold = 2e-4;  // relative mid-price change
};

Dataset synth_lob(const SynthConfig& cfg);

}  // namespace tabl

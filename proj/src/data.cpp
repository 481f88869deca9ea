#include "tabl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tabl/rng.hpp"

namespace tabl {

namespace fs = std::filesystem;

constexpr int kRecordLen = kFeatureDim + 5;  // 144 features + 5 labels

int horizon_index(int horizon) {
  for (size_t i = 0; i < kHorizons.size(); ++i)
    if (kHorizons[i] == horizon) return static_cast<int>(i);
  throw std::invalid_argument("unsupported horizon " + std::to_string(horizon) +
                              " (expected one of 10,20,30,50,100)");
}

long Dataset::total_vectors() const {
  long n = 0;
  for (const auto& d : days) n += static_cast<long>(d.events.size());
  return n;
}

int to_internal_label(int dataset_label) {
  if (dataset_label < 1 || dataset_label > 3) {
    throw std::invalid_argument("label " + std::to_string(dataset_label) +
                                " outside {1,2,3}");
  }
  return dataset_label - 1;
}

double mid_price(double best_ask, double best_bid) {
  if (!std::isfinite(best_ask) || !std::isfinite(best_bid)) {
    throw NumericError("mid_price: non-finite input");
  }
  if (best_ask < best_bid) {
    std::fprintf(stderr, "warning: crossed book, ask %g < bid %g\n", best_ask,
                 best_bid);
  }
  return (best_ask + best_bid) / 2.0;
}

namespace {

// Reads a whole whitespace-separated numeric file into rows of doubles.
std::vector<std::vector<double>> read_numeric_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": non-numeric token '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

FeatureVector record_to_vector(const std::vector<double>& rec,
                               const std::string& where) {
  FeatureVector fv;
  std::copy(rec.begin(), rec.begin() + kFeatureDim, fv.values.begin());
  for (int h = 0; h < 5; ++h) {
    const double raw = rec[kFeatureDim + h];
    const int lab = static_cast<int>(std::lround(raw));
    if (lab < 1 || lab > 3 || std::abs(raw - lab) > 1e-9) {
      throw ParseError(where + ": unknown label value " + std::to_string(raw));
    }
    fv.labels[h] = lab;
  }
  return fv;
}

Day parse_day_file(const std::string& path) {
  auto rows = read_numeric_rows(path);
  if (rows.empty()) throw ParseError(path + ": empty file");

  // Orientation: records-as-rows has 149 values per line; records-as-columns
  // has 149 lines.
  const bool rows_are_records = rows[0].size() == kRecordLen;
  if (!rows_are_records && static_cast<int>(rows.size()) != kRecordLen) {
    throw ParseError(path + ": neither dimension is " +
                     std::to_string(kRecordLen) + " (got " +
                     std::to_string(rows.size()) + " rows of " +
                     std::to_string(rows[0].size()) + ")");
  }

  Day day;
  if (rows_are_records) {
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != kRecordLen) {
        throw ParseError(path + ": row " + std::to_string(i + 1) + " has " +
                         std::to_string(rows[i].size()) + " values, expected " +
                         std::to_string(kRecordLen));
      }
      day.events.push_back(
          record_to_vector(rows[i], path + ":" + std::to_string(i + 1)));
    }
  } else {
    const size_t n = rows[0].size();
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != n) {
        throw ParseError(path + ": row " + std::to_string(r + 1) +
                         " has ragged length");
      }
    }
    for (size_t c = 0; c < n; ++c) {
      std::vector<double> rec(kRecordLen);
      for (int r = 0; r < kRecordLen; ++r) rec[r] = rows[r][c];
      day.events.push_back(
          record_to_vector(rec, path + ":col " + std::to_string(c + 1)));
    }
  }
  return day;
}

}  // namespace

Dataset load_fi2010(const std::string& path) {
  Dataset ds;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path().string());
    }
    if (files.empty()) throw ParseError("no files in " + path);
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ds.days.push_back(parse_day_file(f));
  } else {
    ds.days.push_back(parse_day_file(path));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Binary day cache
// ---------------------------------------------------------------------------

static constexpr char kCacheMagic[8] = {'T', 'A', 'B', 'L', 'D', 'A', 'T', 'A'};
static constexpr uint32_t kCacheVersion = 1;

void save_cache(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out.write(kCacheMagic, sizeof(kCacheMagic));
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof(kCacheVersion));
  const uint32_t n_days = static_cast<uint32_t>(ds.days.size());
  out.write(reinterpret_cast<const char*>(&n_days), sizeof(n_days));
  for (const auto& day : ds.days) {
    const uint64_t n = day.events.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (const auto& fv : day.events) {
      out.write(reinterpret_cast<const char*>(fv.values.data()),
                sizeof(double) * kFeatureDim);
      for (int lab : fv.labels) {
        const int32_t l = lab;
        out.write(reinterpret_cast<const char*>(&l), sizeof(l));
      }
    }
  }
}

Dataset load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw ParseError(path + ": not a day cache (bad magic)");
  }
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kCacheVersion) {
    throw ParseError(path + ": unsupported cache version " +
                     std::to_string(version));
  }
  uint32_t n_days = 0;
  in.read(reinterpret_cast<char*>(&n_days), sizeof(n_days));
  Dataset ds;
  for (uint32_t d = 0; d < n_days; ++d) {
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    Day day;
    day.events.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
      in.read(reinterpret_cast<char*>(day.events[i].values.data()),
              sizeof(double) * kFeatureDim);
      for (int h = 0; h < 5; ++h) {
        int32_t l = 0;
        in.read(reinterpret_cast<char*>(&l), sizeof(l));
        day.events[i].labels[h] = l;
      }
    }
    if (!in) throw ParseError(path + ": truncated cache");
    ds.days.push_back(std::move(day));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Windows and splits
// ---------------------------------------------------------------------------

std::vector<SampleWindow> build_windows(const Day& day, int horizon,
                                        int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const int h_idx = horizon_index(horizon);
  std::vector<SampleWindow> out;
  const int n = static_cast<int>(day.events.size());
  for (int end = kHistorySteps - 1; end < n; end += stride) {
    SampleWindow w;
    w.x = Matrix(kLobDim, kHistorySteps);
    for (int t = 0; t < kHistorySteps; ++t) {
      const FeatureVector& fv = day.events[end - kHistorySteps + 1 + t];
      for (int d = 0; d < kLobDim; ++d)
        w.x(d, t) = static_cast<Scalar>(fv.values[d]);
    }
    w.label = to_internal_label(day.events[end].labels[h_idx]);
    out.push_back(std::move(w));
  }
  return out;
}

std::array<long, 3> class_counts(const std::vector<SampleWindow>& windows) {
  if (windows.empty()) throw std::invalid_argument("class_counts: no windows");
  std::array<long, 3> counts{};
  for (const auto& w : windows) ++counts[w.label];
  for (int c = 0; c < 3; ++c) {
    if (counts[c] == 0) {
      throw std::runtime_error("class " + std::to_string(c) +
                               " has no samples; weighted loss undefined");
    }
  }
  return counts;
}

Split make_split(const Dataset& ds, const SplitPlan& plan) {
  const int n_days = static_cast<int>(ds.days.size());
  Split s;
  if (plan.setup == 1) {
    if (plan.fold < 1 || plan.fold + 1 > n_days) {
      throw std::invalid_argument("setup 1 fold " + std::to_string(plan.fold) +
                                  " needs " + std::to_string(plan.fold + 1) +
                                  " days, dataset has " +
                                  std::to_string(n_days));
    }
    for (int d = 0; d < plan.fold; ++d) s.train_days.push_back(d);
    s.test_days.push_back(plan.fold);
  } else if (plan.setup == 2) {
    if (n_days < 8) {
      throw std::invalid_argument("setup 2 needs at least 8 days, dataset has " +
                                  std::to_string(n_days));
    }
    for (int d = 0; d < 7; ++d) s.train_days.push_back(d);
    for (int d = 7; d < n_days; ++d) s.test_days.push_back(d);
  } else {
    throw std::invalid_argument("setup must be 1 or 2");
  }
  return s;
}

std::vector<SampleWindow> windows_for_days(const Dataset& ds,
                                           const std::vector<int>& days,
                                           int horizon, int stride) {
  std::vector<SampleWindow> out;
  for (int d : days) {
    auto w = build_windows(ds.days.at(d), horizon, stride);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

Dataset synth_lob(const SynthConfig& cfg) {
  if (cfg.n_days <= 0 || cfg.vectors_per_day <= 0) {
    throw std::invalid_argument("synth_lob: sizes must be positive");
  }
  Rng rng = make_rng(cfg.seed, "synth");
  std::normal_distribution<double> noise(0.0, 1.0);
  std::normal_distribution<double> ret(0.0, 1e-4);
  std::lognormal_distribution<double> vol(3.0, 0.6);
  std::uniform_int_distribution<int> cls(0, 2);

  Dataset ds;
  for (int d = 0; d < cfg.n_days; ++d) {
    Day day;
    std::vector<double> mids(cfg.vectors_per_day);
    double mid = 100.0;
    for (int i = 0; i < cfg.vectors_per_day; ++i) {
      mid *= 1.0 + ret(rng);
      mids[i] = mid;
      FeatureVector fv;
      const double spread = 0.01 + 0.002 * std::abs(noise(rng));
      const double ask1 = mid + spread / 2.0;
      const double bid1 = mid - spread / 2.0;
      // Layout: {p_ask, v_ask, p_bid, v_bid} per level, 10 levels.
      for (int lvl = 0; lvl < 10; ++lvl) {
        fv.values[4 * lvl + 0] = ask1 + 0.01 * lvl;
        fv.values[4 * lvl + 1] = vol(rng);
        fv.values[4 * lvl + 2] = bid1 - 0.01 * lvl;
        fv.values[4 * lvl + 3] = vol(rng);
      }
      for (int k = kLobDim; k < kFeatureDim; ++k) fv.values[k] = noise(rng);
      day.events.push_back(fv);
    }

    if (cfg.separable) {
      // Replace the LOB block by standard noise and plant a margin bump on
      // the dimension matching the class, so the label is a deterministic
      // linear function of the vector itself (the newest column of any
      // window it labels).
      for (auto& fv : day.events) {
        const int c = cls(rng);
        for (int k = 0; k < kLobDim; ++k) fv.values[k] = noise(rng);
        // Wide-margin one-hot code on the first three dims: argmax over
        // them recovers the class regardless of the residual noise.
        for (int k = 0; k < 3; ++k)
          fv.values[k] = (k == c ? 2.0 : -2.0) + 0.2 * noise(rng);
        for (int h = 0; h < 5; ++h) fv.labels[h] = c + 1;
      }
    } else {
      // Label by thresholding the mean future mid-price change, per horizon.
      for (int i = 0; i < cfg.vectors_per_day; ++i) {
        for (int h = 0; h < 5; ++h) {
          const int horizon = kHorizons[h];
          double acc = 0;
          int count = 0;
          for (int k = i + 1; k <= i + horizon && k < cfg.vectors_per_day; ++k) {
            acc += mids[k];
            ++count;
          }
          int label = 2;  // stationary
          if (count > 0) {
            const double rel = (acc / count - mids[i]) / mids[i];
            if (rel > cfg.threshold)
              label = 1;
            else if (rel < -cfg.threshold)
              label = 3;
          }
          day.events[i].labels[h] = label;
        }
      }
      // Per-day z-score of the LOB block, mirroring the normalized dataset.
      for (int k = 0; k < kLobDim; ++k) {
        double mean = 0;
        for (const auto& fv : day.events) mean += fv.values[k];
        mean /= day.events.size();
        double var = 0;
        for (const auto& fv : day.events) {
          const double d2 = fv.values[k] - mean;
          var += d2 * d2;
        }
        const double sd = std::sqrt(var / day.events.size());
        for (auto& fv : day.events)
          fv.values[k] = sd > 0 ? (fv.values[k] - mean) / sd : 0.0;
      }
    }
    ds.days.push_back(std::move(day));
  }
  return ds;
}

}  // namespace tabl

#include "mwpose/horizontal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mwpose/errors.hpp"
#include "mwpose/kernels.hpp"
#include "mwpose/parallel.hpp"

namespace mwpose {
namespace {

// Maps v - ref into [-45, 45) so angles mod 90 can be averaged around ref.
double unwrap90(double v, double ref) {
  double d = v - ref;
  d -= 90.0 * std::floor((d + 45.0) / 90.0);
  return d;
}

double fold90(double v) {
  if (v < 0.0) v += 90.0;
  if (v >= 90.0) v -= 90.0;
  return v;
}

// The folded histogram measures the angle clockwise from x (the fold of the
// signed kernel angle); the reported gamma is the counterclockwise angle of
// the dominant direction. The two fold to complements within [0,90).
double fold_space_to_gamma(double folded) { return folded == 0.0 ? 0.0 : 90.0 - folded; }

double cluster_mean(const std::vector<int>& cells, const AngleHistogram1D& hist) {
  int heaviest = cells.front();
  for (int c : cells)
    if (hist.weights[static_cast<std::size_t>(c)] >
        hist.weights[static_cast<std::size_t>(heaviest)])
      heaviest = c;
  const double ref = (heaviest + 0.5) * hist.resolution;
  double wsum = 0.0, acc = 0.0;
  for (int c : cells) {
    const double w = hist.weights[static_cast<std::size_t>(c)];
    const double center = (c + 0.5) * hist.resolution;
    acc += w * (ref + unwrap90(center, ref));
    wsum += w;
  }
  return fold90(wsum > 0.0 ? acc / wsum : ref);
}

}  // namespace

double AngleHistogram1D::total_weight() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

int AngleHistogram1D::max_cell() const {
  if (weights.empty()) return -1;
  int best = 0;
  for (int i = 1; i < cells(); ++i)
    if (weights[static_cast<std::size_t>(i)] > weights[static_cast<std::size_t>(best)]) best = i;
  return best;
}

SampleSubset filter_horizontal(const GeometrySet& set, const FrameConfig& frame) {
  const SampleArrays& s = set.samples;
  const std::size_t n = s.size();
  std::vector<double> dots(n);
  if (n > 0)
    kernels::active().dot_axis(s.nx.data(), s.ny.data(), s.nz.data(), n, frame.z().vec(),
                               dots.data());
  const double band = std::cos(deg_to_rad(defaults::kHorizontalBandMinDeg));
  SampleSubset out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(dots[i]) <= band) {
      out.nx.push_back(s.nx[i]);
      out.ny.push_back(s.ny[i]);
      out.nz.push_back(s.nz[i]);
      out.w.push_back(s.w[i]);
      out.src.push_back(static_cast<std::uint32_t>(i));
    }
  }
  if (out.size() == 0)
    fail(errc::no_horizontal_normals, "no normals within the horizontal band");
  return out;
}

double fold_to_quarter(double gamma_deg) {
  double g = gamma_deg;
  if (g < 0.0) g += 180.0;
  if (g > 90.0) g -= 90.0;
  if (g == 90.0) g = 0.0;
  return g;
}

HorizontalAngleSet horizontal_angles(const SampleSubset& subset, const FrameConfig& frame,
                                     int threads) {
  const std::size_t n = subset.size();
  HorizontalAngleSet out;
  out.raw.resize(n);
  out.folded.resize(n);
  out.weights = subset.w;
  out.src = subset.src;
  const kernels::Backend& k = kernels::active();
  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    k.horizontal_angles(subset.nx.data() + begin, subset.ny.data() + begin,
                        subset.nz.data() + begin, end - begin, frame.x().vec(), frame.y().vec(),
                        out.raw.data() + begin, out.folded.data() + begin);
  });
  out.total_weight = n > 0 ? k.weighted_sum(out.weights.data(), n) : 0.0;
  return out;
}

AngleHistogram1D build_histogram(const HorizontalAngleSet& angles, double resolution,
                                 int threads) {
  if (!(resolution > 0.0))
    fail(errc::bad_resolution, "histogram resolution must be positive");
  const double cells_real = 90.0 / resolution;
  const double cells_rounded = std::round(cells_real);
  if (std::fabs(cells_real - cells_rounded) > 1e-9 || cells_rounded < 1.0)
    fail(errc::bad_resolution,
         "histogram resolution must divide 90 evenly, got " + std::to_string(resolution));
  const int cells = static_cast<int>(cells_rounded);

  AngleHistogram1D hist;
  hist.resolution = resolution;
  hist.weights.assign(static_cast<std::size_t>(cells), 0.0);
  hist.counts.assign(static_cast<std::size_t>(cells), 0);

  const std::size_t n = angles.size();
  const std::size_t chunks = chunk_count(n);
  std::vector<std::vector<double>> pw(chunks);
  std::vector<std::vector<std::uint64_t>> pc(chunks);
  parallel_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& w = pw[c];
    auto& cnt = pc[c];
    w.assign(static_cast<std::size_t>(cells), 0.0);
    cnt.assign(static_cast<std::size_t>(cells), 0);
    for (std::size_t i = begin; i < end; ++i) {
      int cell = static_cast<int>(std::floor(angles.folded[i] / resolution));
      if (cell < 0) cell = 0;
      if (cell >= cells) cell = cells - 1;
      w[static_cast<std::size_t>(cell)] += angles.weights[i];
      cnt[static_cast<std::size_t>(cell)] += 1;
    }
  });
  // Chunk-ordered merge keeps the sums independent of the thread count.
  for (std::size_t c = 0; c < chunks; ++c) {
    for (int j = 0; j < cells; ++j) {
      hist.weights[static_cast<std::size_t>(j)] += pw[c][static_cast<std::size_t>(j)];
      hist.counts[static_cast<std::size_t>(j)] += pc[c][static_cast<std::size_t>(j)];
    }
  }
  return hist;
}

std::vector<CellCluster1D> threshold_and_cluster(const AngleHistogram1D& hist, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    fail(errc::bad_config, "peak threshold fraction must lie in (0, 1]");
  const int cells = hist.cells();
  std::vector<CellCluster1D> out;
  if (cells == 0) return out;
  const double cutoff = fraction * hist.weights[static_cast<std::size_t>(hist.max_cell())];
  std::vector<char> marked(static_cast<std::size_t>(cells));
  int marked_count = 0;
  for (int i = 0; i < cells; ++i) {
    marked[static_cast<std::size_t>(i)] = hist.weights[static_cast<std::size_t>(i)] >= cutoff;
    marked_count += marked[static_cast<std::size_t>(i)];
  }

  auto finish = [&](CellCluster1D& cl) {
    cl.weight = 0.0;
    for (int c : cl.cells) cl.weight += hist.weights[static_cast<std::size_t>(c)];
    cl.mean_angle = cluster_mean(cl.cells, hist);
    out.push_back(std::move(cl));
  };

  if (marked_count == cells) {
    CellCluster1D cl;
    for (int i = 0; i < cells; ++i) cl.cells.push_back(i);
    finish(cl);
  } else {
    for (int i = 0; i < cells; ++i) {
      const int prev = (i + cells - 1) % cells;
      if (!marked[static_cast<std::size_t>(i)] || marked[static_cast<std::size_t>(prev)])
        continue;
      CellCluster1D cl;
      for (int j = i; marked[static_cast<std::size_t>(j % cells)]; ++j)
        cl.cells.push_back(j % cells);
      finish(cl);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CellCluster1D& a, const CellCluster1D& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.mean_angle < b.mean_angle;
  });
  return out;
}

double coarse_gamma(const CellCluster1D& cluster, const AngleHistogram1D& hist) {
  return cluster_mean(cluster.cells, hist);
}

double refine_gamma(const HorizontalAngleSet& angles, double gamma0, double window,
                    bool* fell_back) {
  std::vector<std::pair<double, double>> in_window;  // (unwrapped value, weight)
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double d = unwrap90(angles.folded[i], gamma0);
    if (std::fabs(d) <= window) in_window.emplace_back(gamma0 + d, angles.weights[i]);
  }
  if (fell_back) *fell_back = in_window.empty();
  if (in_window.empty()) return gamma0;
  std::stable_sort(in_window.begin(), in_window.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& [v, w] : in_window) total += w;
  double cum = 0.0;
  for (const auto& [v, w] : in_window) {
    cum += w;
    if (cum >= total * 0.5) return fold90(v);
  }
  return fold90(in_window.back().first);
}

HorizontalAlignment align_horizontal(const GeometrySet& set, const FrameConfig& frame,
                                     const HorizontalOptions& opts) {
  const SampleSubset subset = filter_horizontal(set, frame);
  const HorizontalAngleSet angles = horizontal_angles(subset, frame, opts.threads);
  HorizontalAlignment result;
  result.histogram = build_histogram(angles, opts.resolution, opts.threads);
  result.clusters = threshold_and_cluster(result.histogram, opts.threshold_fraction);
  const double coarse_fold = coarse_gamma(result.clusters.front(), result.histogram);
  const double refined_fold =
      refine_gamma(angles, coarse_fold, opts.refine_window, &result.refine_fell_back);
  result.gamma_coarse = fold_space_to_gamma(coarse_fold);
  result.gamma_refined = fold_space_to_gamma(refined_fold);
  result.rotation = rotation_about_axis(frame.z(), -result.gamma_refined);
  result.normal_count = subset.size();
  return result;
}

std::vector<ManhattanFrame> list_manhattan_frames(const GeometrySet& set,
                                                  const FrameConfig& frame, double fraction,
                                                  const HorizontalOptions& opts) {
  const SampleSubset subset = filter_horizontal(set, frame);
  const HorizontalAngleSet angles = horizontal_angles(subset, frame, opts.threads);
  const AngleHistogram1D hist = build_histogram(angles, opts.resolution, opts.threads);
  const std::vector<CellCluster1D> clusters = threshold_and_cluster(hist, fraction);

  std::vector<ManhattanFrame> merged;
  for (const CellCluster1D& cl : clusters) {
    const double refined = refine_gamma(angles, coarse_gamma(cl, hist), opts.refine_window);
    const double gamma = fold_space_to_gamma(refined);
    bool absorbed = false;
    for (ManhattanFrame& mf : merged) {
      if (std::fabs(unwrap90(gamma, mf.gamma)) < defaults::kFrameMergeToleranceDeg) {
        mf.support += cl.weight;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back({gamma, cl.weight});
  }
  std::stable_sort(merged.begin(), merged.end(), [](const ManhattanFrame& a, const ManhattanFrame& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.gamma < b.gamma;
  });
  return merged;
}

}  // namespace mwpose

#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "errors.hpp"
#include "voxelops.hpp"

namespace maskforge {

namespace {

// Sentinel for "no site in this line yet". Large enough to dominate any
// in-grid squared distance, small enough that the parabola arithmetic stays
// finite.
constexpr double kFar = 1e30;

void require_dims(const BinaryMask& a, const BinaryMask& b) {
  if (a.dims != b.dims) throw DataError("mask dimensions do not match");
}

void require_grid(const BinaryMask& a, const BinaryMask& b) {
  require_dims(a, b);
  if (a.spacing != b.spacing) throw DataError("mask spacings do not match");
}

// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher) with sample
// pitch w, in physical units. f and d must not alias.
void dt1d(const double* f, double* d, std::int64_t* v, double* z, std::size_t n,
          double w) {
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = 1; q < n; ++q) {
    double s;
    for (;;) {
      const double xq = w * static_cast<double>(q);
      const double xv = w * static_cast<double>(v[k]);
      s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
      if (s <= z[k]) {
        --k;  // z[0] = -inf guarantees k never underflows
        continue;
      }
      break;
    }
    ++k;
    v[k] = static_cast<std::int64_t>(q);
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double xq = w * static_cast<double>(q);
    while (z[k + 1] < xq) ++k;
    const double dx = xq - w * static_cast<double>(v[k]);
    d[q] = dx * dx + f[v[k]];
  }
}

// Anisotropic squared Euclidean distance to the nearest site voxel center.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& sites,
                                const Dims& dims, const Spacing& spacing) {
  const std::uint64_t nx = dims[0], ny = dims[1], nz = dims[2];
  std::vector<double> g(voxel_count(dims));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = sites[i] ? 0.0 : kFar;

  const std::size_t nmax = static_cast<std::size_t>(std::max({nx, ny, nz}));
  std::vector<double> f(nmax), d(nmax), z(nmax + 1);
  std::vector<std::int64_t> v(nmax);

  auto pass = [&](std::uint64_t len, std::uint64_t stride, std::uint64_t lines_a,
                  std::uint64_t stride_a, std::uint64_t lines_b,
                  std::uint64_t stride_b, double w) {
    for (std::uint64_t a = 0; a < lines_a; ++a)
      for (std::uint64_t b = 0; b < lines_b; ++b) {
        const std::uint64_t base = a * stride_a + b * stride_b;
        for (std::uint64_t i = 0; i < len; ++i) f[i] = g[base + i * stride];
        dt1d(f.data(), d.data(), v.data(), z.data(), len, w);
        for (std::uint64_t i = 0; i < len; ++i) g[base + i * stride] = d[i];
      }
  };

  pass(nx, 1, ny, nx, nz, nx * ny, spacing[0]);          // along x
  pass(ny, nx, nx, 1, nz, nx * ny, spacing[1]);          // along y
  pass(nz, nx * ny, nx, 1, ny, nx, spacing[2]);          // along z
  return g;
}

std::vector<std::uint8_t> surface_grid(const BinaryMask& mask) {
  const std::uint64_t nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
  std::vector<std::uint8_t> surf(mask.occupancy.size(), 0);
  for (std::uint64_t z = 0; z < nz; ++z)
    for (std::uint64_t y = 0; y < ny; ++y)
      for (std::uint64_t x = 0; x < nx; ++x) {
        const std::uint64_t i = linear_index(mask.dims, x, y, z);
        if (!mask.occupancy[i]) continue;
        const bool exposed =
            x == 0 || !mask.occupancy[i - 1] || x + 1 == nx || !mask.occupancy[i + 1] ||
            y == 0 || !mask.occupancy[i - nx] || y + 1 == ny ||
            !mask.occupancy[i + nx] || z == 0 || !mask.occupancy[i - nx * ny] ||
            z + 1 == nz || !mask.occupancy[i + nx * ny];
        if (exposed) surf[i] = 1;
      }
  return surf;
}

// Linear-interpolation percentile at rank 0.95*(n-1); sorts in place.
double percentile95(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const double r = 0.95 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(r);
  if (lo + 1 >= values.size()) return values[lo];
  const double frac = r - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Dice: return "dice";
    case Metric::Hd95: return "hd95";
    case Metric::LwDice: return "lw_dice";
    case Metric::LwHd95: return "lw_hd95";
  }
  throw ValidationError("invalid metric enum value");
}

Metric metric_from_name(const std::string& name) {
  if (name == "dice") return Metric::Dice;
  if (name == "hd95") return Metric::Hd95;
  if (name == "lw_dice") return Metric::LwDice;
  if (name == "lw_hd95") return Metric::LwHd95;
  throw ValidationError("unknown metric '" + name +
                        "' (expected dice, hd95, lw_dice, or lw_hd95)");
}

double dice(const BinaryMask& gt, const BinaryMask& pred,
            const EdgeCasePolicy& policy) {
  require_dims(gt, pred);
  std::uint64_t a = 0, b = 0, inter = 0;
  for (std::size_t i = 0; i < gt.occupancy.size(); ++i) {
    const bool ga = gt.occupancy[i] != 0, pb = pred.occupancy[i] != 0;
    a += ga;
    b += pb;
    inter += ga && pb;
  }
  if (a == 0 && b == 0) return policy.both_empty_dice;
  if (a == 0 || b == 0) return policy.one_empty_dice;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

std::vector<std::array<std::uint64_t, 3>> surface_voxels(const BinaryMask& mask) {
  const std::vector<std::uint8_t> surf = surface_grid(mask);
  std::vector<std::array<std::uint64_t, 3>> out;
  const std::uint64_t nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
  for (std::uint64_t z = 0; z < nz; ++z)
    for (std::uint64_t y = 0; y < ny; ++y)
      for (std::uint64_t x = 0; x < nx; ++x)
        if (surf[linear_index(mask.dims, x, y, z)]) out.push_back({x, y, z});
  return out;
}

double hd95(const BinaryMask& gt, const BinaryMask& pred,
            const EdgeCasePolicy& policy) {
  require_grid(gt, pred);
  const bool gt_empty = gt.empty_mask(), pred_empty = pred.empty_mask();
  if (gt_empty && pred_empty) return policy.both_empty_hd;
  if (gt_empty || pred_empty) return policy.one_empty_hd;

  const std::vector<std::uint8_t> gs = surface_grid(gt);
  const std::vector<std::uint8_t> ps = surface_grid(pred);
  const std::vector<double> to_pred = squared_edt(ps, gt.dims, gt.spacing);
  const std::vector<double> to_gt = squared_edt(gs, gt.dims, gt.spacing);

  std::vector<double> d_gt, d_pred;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (gs[i]) d_gt.push_back(std::sqrt(to_pred[i]));
    if (ps[i]) d_pred.push_back(std::sqrt(to_gt[i]));
  }
  return std::max(percentile95(d_gt), percentile95(d_pred));
}

std::pair<double, double> lesion_wise(const BinaryMask& gt, const BinaryMask& pred,
                                      const LesionMatchConfig& config,
                                      const EdgeCasePolicy& policy) {
  require_grid(gt, pred);
  if (gt.empty_mask() && pred.empty_mask())
    return {policy.both_empty_dice, policy.both_empty_hd};

  const BinaryMask dilated =
      dilate(gt, Connectivity::Face6, config.dilation_iterations);
  const ComponentLabeling dil_lab = label_components(dilated, Connectivity::Full26);
  const ComponentLabeling pred_lab = label_components(pred, Connectivity::Full26);

  // A GT lesion is a dilated component restricted to the original mask; its
  // size for the min-size filter is that restriction's voxel count.
  std::vector<std::uint64_t> lesion_size(dil_lab.count(), 0);
  for (std::size_t i = 0; i < gt.occupancy.size(); ++i)
    if (gt.occupancy[i] && dil_lab.ids[i]) ++lesion_size[dil_lab.ids[i] - 1];
  std::vector<bool> kept(dil_lab.count());
  for (std::size_t c = 0; c < kept.size(); ++c)
    kept[c] = lesion_size[c] > 0 && lesion_size[c] >= config.min_lesion_size;

  // Pred component -> kept lesions whose dilated extent it touches.
  std::vector<std::vector<std::uint32_t>> lesion_preds(dil_lab.count());
  std::vector<bool> pred_matched(pred_lab.count(), false);
  std::unordered_set<std::uint64_t> seen_pairs;
  for (std::size_t i = 0; i < gt.occupancy.size(); ++i) {
    const std::uint32_t p = pred_lab.ids[i];
    const std::uint32_t c = dil_lab.ids[i];
    if (!p || !c || !kept[c - 1]) continue;
    const std::uint64_t key = (static_cast<std::uint64_t>(c) << 32) | p;
    if (!seen_pairs.insert(key).second) continue;
    lesion_preds[c - 1].push_back(p);
    pred_matched[p - 1] = true;
  }

  std::vector<std::pair<double, double>> entries;
  BinaryMask lesion{gt.dims, gt.spacing, {}};
  BinaryMask matched{gt.dims, gt.spacing, {}};
  for (std::size_t c = 0; c < kept.size(); ++c) {
    if (!kept[c]) continue;
    if (lesion_preds[c].empty()) {
      entries.emplace_back(config.unmatched_dice, config.unmatched_hd);
      continue;
    }
    lesion.occupancy.assign(gt.occupancy.size(), 0);
    matched.occupancy.assign(gt.occupancy.size(), 0);
    std::vector<bool> use_pred(pred_lab.count() + 1, false);
    for (std::uint32_t p : lesion_preds[c]) use_pred[p] = true;
    for (std::size_t i = 0; i < gt.occupancy.size(); ++i) {
      if (gt.occupancy[i] && dil_lab.ids[i] == c + 1) lesion.occupancy[i] = 1;
      if (pred_lab.ids[i] && use_pred[pred_lab.ids[i]]) matched.occupancy[i] = 1;
    }
    entries.emplace_back(dice(lesion, matched, policy),
                         hd95(lesion, matched, policy));
  }
  for (std::size_t p = 0; p < pred_matched.size(); ++p)
    if (!pred_matched[p])
      entries.emplace_back(config.unmatched_dice, config.unmatched_hd);

  if (entries.empty())  // every lesion filtered out and no pred components
    return {policy.both_empty_dice, policy.both_empty_hd};

  double sum_dice = 0.0, sum_hd = 0.0;
  for (const auto& [dv, hv] : entries) {
    sum_dice += dv;
    sum_hd += hv;
  }
  const double n = static_cast<double>(entries.size());
  return {sum_dice / n, sum_hd / n};
}

std::vector<MetricRecord> evaluate_case(const LabelVolume& gt, const LabelVolume& pred,
                                        const std::string& strategy_id,
                                        const std::vector<Metric>& metrics,
                                        const LesionMatchConfig& config,
                                        const EdgeCasePolicy& policy,
                                        const LabelScheme& scheme) {
  if (gt.dims != pred.dims)
    throw DataError("volume dimensions do not match for case '" + gt.case_id + "'");
  if (gt.spacing != pred.spacing)
    throw DataError("volume spacings do not match for case '" + gt.case_id + "'");

  bool want[4] = {false, false, false, false};
  for (Metric m : metrics) want[static_cast<int>(m)] = true;

  std::vector<MetricRecord> out;
  for (const auto& [class_name, labels] : scheme.classes()) {
    const BinaryMask gm = region_mask(gt, labels, scheme);
    const BinaryMask pm = region_mask(pred, labels, scheme);
    std::pair<double, double> lw{0.0, 0.0};
    bool lw_ready = false;
    for (int mi = 0; mi < 4; ++mi) {
      if (!want[mi]) continue;
      const Metric m = static_cast<Metric>(mi);
      double value = 0.0;
      switch (m) {
        case Metric::Dice:
          value = dice(gm, pm, policy);
          break;
        case Metric::Hd95:
          value = hd95(gm, pm, policy);
          break;
        case Metric::LwDice:
        case Metric::LwHd95:
          if (!lw_ready) {
            lw = lesion_wise(gm, pm, config, policy);
            lw_ready = true;
          }
          value = (m == Metric::LwDice) ? lw.first : lw.second;
          break;
      }
      out.push_back({gt.case_id, strategy_id, class_name, m, value});
    }
  }
  return out;
}

}  // namespace maskforge

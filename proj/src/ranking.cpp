#include "ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "errors.hpp"

namespace maskforge {

RankingGrid RankingGrid::from_records(const std::vector<MetricRecord>& records) {
  RankingGrid grid;
  std::map<std::string, std::size_t> strategy_index;
  std::map<std::tuple<std::string, std::string, Metric>, std::size_t> cell_index;
  std::map<std::string, bool> patient_seen;

  for (const MetricRecord& r : records) {
    if (!std::isfinite(r.value))
      throw DataError("non-finite metric value for patient '" + r.patient_id +
                      "', class '" + r.class_name + "', metric " +
                      metric_name(r.metric));
    auto [sit, fresh] = strategy_index.emplace(r.strategy_id, grid.strategies_.size());
    if (fresh) grid.strategies_.push_back(r.strategy_id);
    if (patient_seen.emplace(r.patient_id, true).second)
      grid.patients_.push_back(r.patient_id);

    const auto key = std::make_tuple(r.patient_id, r.class_name, r.metric);
    auto [cit, new_cell] = cell_index.emplace(key, grid.cells_.size());
    if (new_cell)
      grid.cells_.push_back(Cell{r.patient_id, r.class_name, r.metric, {}});
    Cell& cell = grid.cells_[cit->second];
    const std::size_t si = sit->second;
    if (cell.values.size() <= si)
      cell.values.resize(si + 1, std::numeric_limits<double>::quiet_NaN());
    if (!std::isnan(cell.values[si]))
      throw DataError("duplicate record for patient '" + r.patient_id +
                      "', class '" + r.class_name + "', metric " +
                      metric_name(r.metric) + ", strategy '" + r.strategy_id + "'");
    cell.values[si] = r.value;
  }

  if (grid.cells_.empty()) throw DataError("ranking grid is empty");
  const std::size_t s = grid.strategies_.size();
  for (Cell& cell : grid.cells_) {
    cell.values.resize(s, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < s; ++i)
      if (std::isnan(cell.values[i]))
        throw DataError("incomplete ranking grid: strategy '" +
                        grid.strategies_[i] + "' has no value for patient '" +
                        cell.patient_id + "', class '" + cell.class_name +
                        "', metric " + metric_name(cell.metric));
  }
  return grid;
}

bool higher_is_better(Metric m) {
  return m == Metric::Dice || m == Metric::LwDice;
}

std::vector<double> rank_cell(const std::vector<double>& values,
                              bool higher_is_better) {
  if (values.size() < 2)
    throw ValidationError("ranking requires at least 2 strategies");
  for (double v : values)
    if (!std::isfinite(v)) throw DataError("non-finite value in ranking cell");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? values[a] > values[b] : values[a] < values[b];
  });

  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) tie; fractional rank = mean of i+1 .. j+1
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> per_patient_rank(const RankingGrid& grid,
                                     const std::string& patient_id) {
  const std::size_t s = grid.strategies().size();
  std::vector<double> sum(s, 0.0);
  std::uint64_t n = 0;
  for (const RankingGrid::Cell& cell : grid.cells()) {
    if (cell.patient_id != patient_id) continue;
    const std::vector<double> ranks =
        rank_cell(cell.values, higher_is_better(cell.metric));
    for (std::size_t i = 0; i < s; ++i) sum[i] += ranks[i];
    ++n;
  }
  if (n == 0)
    throw DataError("no cells for patient '" + patient_id + "'");
  for (double& v : sum) v /= static_cast<double>(n);
  return sum;
}

RankReport global_rank(const RankingGrid& grid) {
  if (grid.patients().empty()) throw DataError("ranking grid has no patients");
  const std::size_t s = grid.strategies().size();

  RankReport report;
  report.strategies = grid.strategies();
  std::vector<double> global_sum(s, 0.0);
  for (const std::string& patient : grid.patients()) {
    std::vector<double> avg = per_patient_rank(grid, patient);
    for (std::size_t i = 0; i < s; ++i) global_sum[i] += avg[i];
    report.per_patient.emplace_back(patient, std::move(avg));
  }
  const double np = static_cast<double>(grid.patients().size());

  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return global_sum[a] < global_sum[b];
  });
  for (std::size_t i : order)
    report.global.emplace_back(grid.strategies()[i], global_sum[i] / np);
  return report;
}

}  // namespace maskforge

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "metrics.hpp"

namespace maskforge {

// Complete (patient x class x metric) -> per-strategy value grid. Building
// one from records is the only way to get an instance, so a grid in hand is
// always complete and finite.
class RankingGrid {
 public:
  struct Cell {
    std::string patient_id;
    std::string class_name;
    Metric metric = Metric::Dice;
    std::vector<double> values;  // indexed like strategies()
  };

  // Strategies and patients keep first-appearance order. Throws DataError on
  // duplicate records, non-finite values, or an incomplete grid.
  static RankingGrid from_records(const std::vector<MetricRecord>& records);

  const std::vector<std::string>& strategies() const { return strategies_; }
  const std::vector<std::string>& patients() const { return patients_; }
  const std::vector<Cell>& cells() const { return cells_; }

 private:
  RankingGrid() = default;

  std::vector<std::string> strategies_;
  std::vector<std::string> patients_;
  std::vector<Cell> cells_;
};

struct RankReport {
  std::vector<std::string> strategies;  // grid order
  // patient -> average rank per strategy (grid strategy order), patients in
  // grid order.
  std::vector<std::pair<std::string, std::vector<double>>> per_patient;
  // (strategy, global average rank), ascending by rank; ties keep grid order.
  std::vector<std::pair<std::string, double>> global;
};

// Fractional ranks: best value gets 1, exact-value ties share the mean of the
// positions they span. Lower-is-better metrics pass higher_is_better=false.
std::vector<double> rank_cell(const std::vector<double>& values,
                              bool higher_is_better);

bool higher_is_better(Metric m);

// Mean of rank_cell over the patient's cells.
std::vector<double> per_patient_rank(const RankingGrid& grid,
                                     const std::string& patient_id);

RankReport global_rank(const RankingGrid& grid);

}  // namespace maskforge

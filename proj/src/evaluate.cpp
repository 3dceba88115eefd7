#include "fatseg/evaluate.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fatseg {
namespace {

double dice_counts(std::size_t both, std::size_t na, std::size_t nb) {
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

template <class It>
double dice_range(It a, It a_end, It b, std::uint8_t l) {
  std::size_t both = 0, na = 0, nb = 0;
  for (; a != a_end; ++a, ++b) {
    const bool x = *a == l;
    const bool y = *b == l;
    na += x;
    nb += y;
    both += x && y;
  }
  return dice_counts(both, na, nb);
}

double ml_of(const QuantReport& r, Label label) {
  if (label == Label::kSat) return r.sat_ml;
  if (label == Label::kVat) return r.vat_ml;
  throw std::invalid_argument("mae_ml: label must be SAT or VAT");
}

}  // namespace

double dice(const MaskGrid& a, const MaskGrid& b, Label label) {
  if (!(a.dims == b.dims) || a.data.size() != b.data.size()) throw std::invalid_argument("dice: dimension mismatch");
  return dice_range(a.data.begin(), a.data.end(), b.data.begin(), code(label));
}

double dice(const LabelSlice& a, const LabelSlice& b, Label label) {
  if (a.nx() != b.nx() || a.ny() != b.ny()) throw std::invalid_argument("dice: dimension mismatch");
  return dice_range(a.data().begin(), a.data().end(), b.data().begin(), code(label));
}

double mae_ml(const std::vector<QuantReport>& pred, const std::vector<QuantReport>& truth, Label label) {
  if (pred.size() != truth.size()) throw std::invalid_argument("mae_ml: length mismatch");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(ml_of(pred[i], label) - ml_of(truth[i], label));
  return sum / static_cast<double>(pred.size());
}

AblationResult ablation_run(const std::vector<Phantom>& battery, const PipelineConfig& config) {
  constexpr Method kMethods[] = {Method::kMadOnly, Method::kLoopOnly, Method::kFusion, Method::kRansac};
  constexpr const char* kNames[] = {"Geometric MAD", "Appearance LoOP", "Context fusion (CRF)", "RANSAC ellipse"};
  AblationResult out;
  std::vector<QuantReport> truth;
  std::vector<std::vector<QuantReport>> pred(4);
  std::vector<std::array<double, 2>> dsc_sum(4, {0.0, 0.0});

  for (std::size_t ci = 0; ci < battery.size(); ++ci) {
    const Phantom& ph = battery[ci];
    truth.push_back(quantify(ph.truth));
    const auto stages = analyze_volume(ph.volume, config);
    for (int m = 0; m < 4; ++m) {
      const SegmentResult seg = assemble(ph.volume, stages, kMethods[m], config);
      CaseScore cs;
      cs.case_index = static_cast<int>(ci);
      cs.method = method_name(kMethods[m]);
      cs.sat_dsc = dice(seg.mask, ph.truth, Label::kSat);
      cs.vat_dsc = dice(seg.mask, ph.truth, Label::kVat);
      cs.sat_ml = seg.report.sat_ml;
      cs.vat_ml = seg.report.vat_ml;
      cs.truth_sat_ml = truth.back().sat_ml;
      cs.truth_vat_ml = truth.back().vat_ml;
      dsc_sum[m][0] += cs.sat_dsc;
      dsc_sum[m][1] += cs.vat_dsc;
      pred[m].push_back(seg.report);
      out.cases.push_back(cs);
    }
  }
  const double n = battery.empty() ? 1.0 : static_cast<double>(battery.size());
  for (int m = 0; m < 4; ++m) {
    EvalRow row;
    row.method = kNames[m];
    row.sat_dsc = dsc_sum[m][0] / n;
    row.vat_dsc = dsc_sum[m][1] / n;
    row.sat_mae = mae_ml(pred[m], truth, Label::kSat);
    row.vat_mae = mae_ml(pred[m], truth, Label::kVat);
    out.rows.push_back(row);
  }
  return out;
}

std::string format_table(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %9s %9s %11s %11s\n", "method", "SAT DSC", "VAT DSC", "SAT MAE ml", "VAT MAE ml");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-22s %8.2f%% %8.2f%% %11.3f %11.3f\n", r.method.c_str(), 100.0 * r.sat_dsc,
                  100.0 * r.vat_dsc, r.sat_mae, r.vat_mae);
    os << line;
  }
  return os.str();
}

std::string to_json(const AblationResult& result) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    j["rows"].push_back({{"method", r.method},
                         {"sat_dsc", r.sat_dsc},
                         {"vat_dsc", r.vat_dsc},
                         {"sat_mae_ml", r.sat_mae},
                         {"vat_mae_ml", r.vat_mae}});
  }
  j["cases"] = nlohmann::ordered_json::array();
  for (const auto& c : result.cases) {
    j["cases"].push_back({{"case", c.case_index},
                          {"method", c.method},
                          {"sat_dsc", c.sat_dsc},
                          {"vat_dsc", c.vat_dsc},
                          {"sat_ml", c.sat_ml},
                          {"vat_ml", c.vat_ml},
                          {"truth_sat_ml", c.truth_sat_ml},
                          {"truth_vat_ml", c.truth_vat_ml}});
  }
  return j.dump(2);
}

}  // namespace fatseg

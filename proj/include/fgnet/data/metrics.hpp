// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_DATA_METRICS_HPP
#define FGNET_DATA_METRICS_HPP

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgnet {

/// Segmentation quality summary. IoU_c = TP / (TP + FP + FN); classes
/// absent from both ground truth and predictions are excluded from the
/// mean, as is the reserved noise class when one is declared.
struct EvalReport {
  int classes = 0;
  std::vector<double> iou;        // one per class; -1 marks excluded classes
  double miou = 0.0;
  double overall_accuracy = 0.0;  // trace(confusion) / N
  std::vector<long> confusion;    // classes x classes, row = truth, col = prediction

  long at(int truth, int pred) const { return confusion[truth * classes + pred]; }
};

inline EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                           int classes, int noise_class = -1) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("evaluate: " + std::to_string(predictions.size()) +
                                " predictions vs " + std::to_string(truth.size()) + " labels");
  EvalReport rep;
  rep.classes = classes;
  rep.confusion.assign(static_cast<std::size_t>(classes) * classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predictions[i];
    if (t < 0 || t >= classes)
      throw std::invalid_argument("evaluate: label " + std::to_string(t) + " out of range");
    if (p < 0 || p >= classes)
      throw std::invalid_argument("evaluate: prediction " + std::to_string(p) + " out of range");
    ++rep.confusion[static_cast<std::size_t>(t) * classes + p];
  }

  long correct = 0;
  rep.iou.assign(classes, -1.0);
  double iou_sum = 0.0;
  int iou_count = 0;
  for (int c = 0; c < classes; ++c) {
    long tp = rep.at(c, c);
    long fp = 0, fn = 0;
    for (int o = 0; o < classes; ++o) {
      if (o == c) continue;
      fp += rep.at(o, c);
      fn += rep.at(c, o);
    }
    correct += tp;
    if (tp + fp + fn == 0) continue;  // absent everywhere
    rep.iou[c] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    if (c != noise_class) {
      iou_sum += rep.iou[c];
      ++iou_count;
    }
  }
  rep.miou = iou_count > 0 ? iou_sum / iou_count : 0.0;
  rep.overall_accuracy =
      truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  return rep;
}

inline std::string format_report(const EvalReport& rep) {
  std::ostringstream os;
  os << "classes: " << rep.classes << "\n";
  for (int c = 0; c < rep.classes; ++c) {
    os << "iou[" << c << "]: ";
    if (rep.iou[c] < 0)
      os << "n/a";
    else
      os << rep.iou[c];
    os << "\n";
  }
  os << "miou: " << rep.miou << "\n";
  os << "overall_accuracy: " << rep.overall_accuracy << "\n";
  return os.str();
}

inline std::string report_csv(const EvalReport& rep) {
  std::ostringstream os;
  os << "class,iou\n";
  for (int c = 0; c < rep.classes; ++c)
    os << c << "," << (rep.iou[c] < 0 ? std::string("nan") : std::to_string(rep.iou[c])) << "\n";
  os << "miou," << rep.miou << "\n";
  os << "accuracy," << rep.overall_accuracy << "\n";
  return os.str();
}

}  // namespace fgnet

#endif  // FGNET_DATA_METRICS_HPP

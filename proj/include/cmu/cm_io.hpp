#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "cmu/confusion_matrix.hpp"

namespace cmu {

// Confusion matrix from text. Accepted layouts:
//   JSON record   {"tp": 26, "fn": 0, "fp": 2, "tn": 6}
//   JSON table    [[26, 0], [2, 6]]   rows = reference +/-, columns = predicted +/-
//   CSV record    tp,fn,fp,tn header (any column order) followed by one data row
//   bare record   26,0,2,6            (TP, FN, FP, TN)
//   CSV table     two rows of two values, or inline "26,0;2,6"
// Throws ParseError with line/field context, NegativeCount, EmptyMatrix.
ConfusionMatrix parse_cm_text(std::string_view text);

// `source` is a path when such a file exists, inline text otherwise.
ConfusionMatrix parse_cm(const std::string& source);

ConfusionMatrix cm_from_json(const nlohmann::json& value);
nlohmann::json cm_to_json(const ConfusionMatrix& cm);

std::string read_file(const std::string& path);

}  // namespace cmu

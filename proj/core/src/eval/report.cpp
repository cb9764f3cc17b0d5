// Copyright 2026 The dogvc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>
#include <sstream>

#include <fmt/format.h>

#include "dogvc/eval.hpp"

namespace dogvc::eval {

namespace {

constexpr const char* kNotTrained = "(not trained)";
constexpr const char* kNone = "n/a";

std::string num(const std::optional<double>& v, int digits = 2) {
  return v ? fmt::format("{:.{}f}", *v, digits) : std::string(kNone);
}

std::string mos_cell(const std::optional<MosSummary>& m) {
  if (!m) return kNone;
  return fmt::format("{:.2f} ± {:.2f} (n={})", m->mean, m->ci95, m->n);
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(kNone); }

std::string row_label(const ReportRow& r) { return r.missing ? r.label + " " + kNotTrained : r.label; }

std::vector<std::string> objective_keys(const Report& report) {
  std::set<std::string> keys;
  for (const auto& r : report.rows) {
    for (const auto& [k, v] : r.objective) keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

void table_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  out << "|";
  for (const auto& c : cells) out << " " << c << " |";
  out << "\n";
}

void table_header(std::ostringstream& out, const std::vector<std::string>& cells) {
  table_row(out, cells);
  out << "|";
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << "\n";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string csv_num(const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : std::string(); }

}  // namespace

std::string Report::to_markdown() const {
  std::ostringstream out;
  const bool exp2 = kind == GridKind::exp2;
  out << "# " << (exp2 ? "Discriminator kernel sweep" : "Method and feature comparison") << "\n\n";
  out << "Source `" << source << "`, target `" << target << "`.\n\n";

  if (exp2) {
    out << "## Architecture\n\n";
    table_header(out, {"Condition", "Kernel delta", "Discriminator RF", "Classifier RF", "Config hash"});
    for (const auto& r : rows) {
      if (r.control) continue;
      table_row(out, {row_label(r), r.kernel_delta ? fmt::format("{:+d}", *r.kernel_delta) : kNone,
                      opt_int(r.receptive_field), opt_int(r.classifier_receptive_field),
                      r.config_hash.empty() ? kNone : "`" + r.config_hash + "`"});
    }
    out << "\n";
  }

  out << "## Mean opinion scores\n\n";
  out << "Each cell is mean ± 95% CI. Published figures are shown in brackets.\n\n";
  table_header(out, {"Condition", "Dog-likeness", "Sound quality", "Clarity"});
  for (const auto& r : rows) {
    std::vector<std::string> cells{row_label(r)};
    for (std::size_t s = 0; s < 3; ++s) cells.push_back(mos_cell(r.mos[s]) + " [" + num(r.published_mos[s]) + "]");
    table_row(out, cells);
  }
  out << "\n";

  out << "## Character error rate\n\n";
  out << "Columns are the first and second evaluation sentences.\n\n";
  table_header(out, {"Condition", "Sentence 1", "Sentence 2"});
  for (const auto& r : rows) {
    // Noise and target-domain originals have no reference transcript.
    if (r.control && !r.published_cer[0] && !r.cer[0]) continue;
    table_row(out, {row_label(r), num(r.cer[0]) + " [" + num(r.published_cer[0]) + "]",
                    num(r.cer[1]) + " [" + num(r.published_cer[1]) + "]"});
  }
  out << "\n";

  const auto keys = objective_keys(*this);
  out << "## Objective measures\n\n";
  std::vector<std::string> header{"Condition"};
  header.insert(header.end(), keys.begin(), keys.end());
  table_header(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{row_label(r)};
    for (const auto& k : keys) {
      const auto it = r.objective.find(k);
      cells.push_back(it == r.objective.end() ? kNone : fmt::format("{:.3f}", it->second));
    }
    table_row(out, cells);
  }
  return out.str();
}

std::string Report::to_csv() const {
  std::ostringstream out;
  const auto keys = objective_keys(*this);
  out << "condition,label,control,missing,kernel_delta,receptive_field,classifier_receptive_field,config_hash";
  for (const auto* s : {"dog", "quality", "clarity"}) {
    out << fmt::format(",mos_{0}_mean,mos_{0}_ci95,mos_{0}_n,published_mos_{0}", s);
  }
  out << ",cer_1,cer_2,published_cer_1,published_cer_2";
  for (const auto& k : keys) out << "," << csv_field(k);
  out << "\n";
  for (const auto& r : rows) {
    out << csv_field(r.condition) << "," << csv_field(r.label) << "," << (r.control ? 1 : 0) << ","
        << (r.missing ? 1 : 0) << "," << (r.kernel_delta ? std::to_string(*r.kernel_delta) : "") << ","
        << (r.receptive_field ? std::to_string(*r.receptive_field) : "") << ","
        << (r.classifier_receptive_field ? std::to_string(*r.classifier_receptive_field) : "") << ","
        << r.config_hash;
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& m = r.mos[s];
      out << "," << (m ? csv_num(m->mean) : "") << "," << (m ? csv_num(m->ci95) : "") << ","
          << (m ? std::to_string(m->n) : "") << "," << csv_num(r.published_mos[s]);
    }
    out << "," << csv_num(r.cer[0]) << "," << csv_num(r.cer[1]) << "," << csv_num(r.published_cer[0]) << ","
        << csv_num(r.published_cer[1]);
    for (const auto& k : keys) {
      const auto it = r.objective.find(k);
      out << "," << (it == r.objective.end() ? "" : fmt::format("{:.6g}", it->second));
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace dogvc::eval

// Copyright 2026 The qfedsim Authors.
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

#include "qfed/metrics_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qfed/error.hpp"

#ifndef QFED_VERSION
#define QFED_VERSION "unknown"
#endif

namespace qfed::io {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<double> row_values(const fl::RoundMetrics& m) {
  return {static_cast<double>(m.round),   static_cast<double>(m.trainings),
          static_cast<double>(m.comm_events), static_cast<double>(m.clusters),
          m.avg_device_train_acc,         m.avg_device_test_acc,
          m.server_val_loss,              m.server_val_acc,
          m.server_test_loss,             m.server_test_acc,
          m.modeled_comm,                 m.modeled_train,
          m.modeled_total};
}

}  // namespace

std::string version() { return QFED_VERSION; }

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "round",           "trainings",          "comm_events",         "clusters",
      "avg_device_train_acc", "avg_device_test_acc", "server_val_loss", "server_val_acc",
      "server_test_loss", "server_test_acc",   "modeled_T_comm",      "modeled_T_train",
      "modeled_T_total"};
  return cols;
}

std::string metrics_csv(const std::vector<fl::RoundMetrics>& rounds) {
  std::ostringstream os;
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& m : rounds) {
    const auto values = row_values(m);
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << fmt(values[i]);
    os << '\n';
  }
  return os.str();
}

std::string timing_csv(const std::vector<fl::RoundMetrics>& rounds) {
  std::ostringstream os;
  os << "round,wall_clock_s\n";
  for (const auto& m : rounds) os << m.round << ',' << fmt(m.wall_clock) << '\n';
  return os.str();
}

std::string summary_json(const fl::ExperimentResult& result, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["version"] = version();
  j["protocol"] = to_string(cfg.protocol);
  const auto config = nlohmann::ordered_json::parse(dump_config(cfg));
  j["seeds"] = config.at("seeds");
  nlohmann::ordered_json fin = nlohmann::ordered_json::object();
  if (!result.rounds.empty()) {
    const auto& last = result.rounds.back();
    const auto values = row_values(last);
    for (std::size_t i = 0; i < values.size(); ++i) fin[metrics_columns()[i]] = values[i];
  }
  j["final"] = fin;
  j["total_trainings"] = result.total_trainings;
  int events = 0;
  double modeled = 0.0;
  for (const auto& m : result.rounds) {
    events += m.comm_events;
    modeled += m.modeled_total;
  }
  j["total_comm_events"] = events;
  j["total_modeled_T"] = modeled;
  j["n_active_devices"] = result.devices.size();
  j["final_server_model"] = result.server_models.empty() ? ModelParams{} : result.server_models.back();
  j["config"] = config;
  return j.dump(2) + "\n";
}

void persist_metrics(const fl::ExperimentResult& result, const ExperimentConfig& cfg,
                     const std::filesystem::path& out_dir, bool device_traces) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "metrics.csv", metrics_csv(result.rounds));
  write_file(out_dir / "timing.csv", timing_csv(result.rounds));
  write_file(out_dir / "summary.json", summary_json(result, cfg));
  if (device_traces) {
    std::ostringstream os;
    os << "device,cluster,trainings,latest_loss,train_score,test_score,n_train,n_test\n";
    for (const auto& d : result.devices) {
      os << d.id << ',' << d.cluster_label << ',' << d.trainings << ',' << fmt(d.latest_loss) << ','
         << fmt(d.train_score) << ',' << fmt(d.test_score) << ',' << d.train.size() << ','
         << d.test.size() << '\n';
    }
    write_file(out_dir / "devices.csv", os.str());
  }
}

std::size_t MetricsTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  MetricsTable t;
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw LoadError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size()) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render_svg(const MetricsTable& table, const std::vector<std::string>& series,
                       const std::string& title) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 40, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const std::size_t xcol = table.column("round");
  std::vector<std::size_t> ycols;
  for (const auto& s : series) ycols.push_back(table.column(s));

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!table.rows.empty()) {
    xmin = xmax = table.rows.front()[xcol];
    ymin = std::numeric_limits<double>::infinity();
    ymax = -ymin;
    for (const auto& row : table.rows) {
      xmin = std::min(xmin, row[xcol]);
      xmax = std::max(xmax, row[xcol]);
      for (auto c : ycols) {
        ymin = std::min(ymin, row[c]);
        ymax = std::max(ymax, row[c]);
      }
    }
    if (ycols.empty()) ymin = 0, ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(sy(yv) + 4) << "\" text-anchor=\"end\">"
       << fmt(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  for (const auto& row : table.rows) {
    os << "<text x=\"" << fmt(sx(row[xcol])) << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << fmt(row[xcol]) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">round</text>\n";
  for (std::size_t s = 0; s < ycols.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      os << (r ? " " : "") << fmt(sx(table.rows[r][xcol])) << ',' << fmt(sy(table.rows[r][ycols[s]]));
    }
    os << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(s);
    os << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kW - kRight + 30
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kW - kRight + 36 << "\" y=\"" << ly << "\">" << series[s] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qfed::io

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hdralign/errors.hpp"

namespace hdralign {

inline constexpr const char* kToolVersion = "0.1.0";

/// One aligned slave in a run report.
struct SlaveRecord {
  std::string slave_path;
  std::string output_path;
  double theta_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  std::vector<int> iterations_per_level;  // coarsest first
  double final_cost = 0.0;
  bool converged = false;
  double mi_before = 0.0;
  double mi_after = 0.0;
};

/// Line-oriented key=value run report: a config echo block followed by one
/// record block per slave, in input order.
struct RunReport {
  std::string version = kToolVersion;
  std::string reference_path;
  std::map<std::string, std::string> config;  // stable (sorted) field order
  std::vector<SlaveRecord> records;

  void write(std::ostream& out) const {
    out << "version=" << version << "\n";
    out << "reference=" << reference_path << "\n";
    for (const auto& [k, v] : config) out << "config." << k << "=" << v << "\n";
    for (const SlaveRecord& r : records) {
      out << "record=begin\n";
      out << "slave=" << r.slave_path << "\n";
      out << "output=" << r.output_path << "\n";
      out << "theta_deg=" << r.theta_deg << "\n";
      out << "tx=" << r.tx << "\n";
      out << "ty=" << r.ty << "\n";
      out << "iterations=";
      for (size_t i = 0; i < r.iterations_per_level.size(); ++i)
        out << (i ? "," : "") << r.iterations_per_level[i];
      out << "\n";
      out << "final_cost=" << r.final_cost << "\n";
      out << "converged=" << (r.converged ? 1 : 0) << "\n";
      out << "mi_before=" << r.mi_before << "\n";
      out << "mi_after=" << r.mi_after << "\n";
      out << "record=end\n";
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report " + path);
    out.precision(10);
    write(out);
  }

  static RunReport load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read report " + path);
    RunReport rep;
    rep.config.clear();
    SlaveRecord cur;
    bool in_record = false;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw IoError("malformed report line: " + line);
      std::string key = line.substr(0, eq);
      std::string val = line.substr(eq + 1);
      if (key == "record") {
        if (val == "begin") {
          cur = SlaveRecord{};
          in_record = true;
        } else {
          rep.records.push_back(cur);
          in_record = false;
        }
      } else if (!in_record) {
        if (key == "version") rep.version = val;
        else if (key == "reference") rep.reference_path = val;
        else if (key.rfind("config.", 0) == 0) rep.config[key.substr(7)] = val;
      } else {
        if (key == "slave") cur.slave_path = val;
        else if (key == "output") cur.output_path = val;
        else if (key == "theta_deg") cur.theta_deg = std::stod(val);
        else if (key == "tx") cur.tx = std::stod(val);
        else if (key == "ty") cur.ty = std::stod(val);
        else if (key == "final_cost") cur.final_cost = std::stod(val);
        else if (key == "converged") cur.converged = (val == "1");
        else if (key == "mi_before") cur.mi_before = std::stod(val);
        else if (key == "mi_after") cur.mi_after = std::stod(val);
        else if (key == "iterations") {
          cur.iterations_per_level.clear();
          std::stringstream ss(val);
          std::string tok;
          while (std::getline(ss, tok, ','))
            if (!tok.empty()) cur.iterations_per_level.push_back(std::stoi(tok));
        }
      }
    }
    return rep;
  }
};

/// Ground-truth sidecar emitted by the synth subcommand.
struct GroundTruth {
  double theta_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double ev = 0.0;

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write sidecar " + path);
    out.precision(10);
    out << "theta_deg=" << theta_deg << "\n"
        << "tx=" << tx << "\n"
        << "ty=" << ty << "\n"
        << "ev=" << ev << "\n";
  }

  static GroundTruth load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read sidecar " + path);
    GroundTruth gt;
    std::string line;
    while (std::getline(in, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      double v = std::stod(line.substr(eq + 1));
      if (key == "theta_deg") gt.theta_deg = v;
      else if (key == "tx") gt.tx = v;
      else if (key == "ty") gt.ty = v;
      else if (key == "ev") gt.ev = v;
    }
    return gt;
  }
};

}  // namespace hdralign

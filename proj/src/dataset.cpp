#include "dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace dlo {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    raise(ErrorCode::CorruptPayload, "bad number '" + s + "' in " + where);
  return v;
}

}  // namespace

Eigen::MatrixXd Dataset::phi_matrix() const {
  Eigen::MatrixXd M(input_dim(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) M.col(i) = samples[i].phi;
  return M;
}

Eigen::MatrixXd Dataset::rdot_matrix() const {
  Eigen::MatrixXd M(n, samples.size());
  for (size_t i = 0; i < samples.size(); ++i) M.col(i) = samples[i].rdot;
  return M;
}

Eigen::MatrixXd Dataset::xdot_matrix() const {
  Eigen::MatrixXd M(input_dim(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) M.col(i) = samples[i].xdot;
  return M;
}

void Dataset::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot open for writing: " + path);

  out << "t";
  for (int i = 0; i < input_dim(); ++i) out << ",phi_" << i;
  for (int i = 0; i < n; ++i) out << ",rdot_" << i;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < l; ++j) out << ",xdot_" << k << "_" << j;
  out << "\n";

  for (const auto& s : samples) {
    if (s.phi.size() != input_dim() || s.rdot.size() != n ||
        s.xdot.size() != input_dim())
      raise(ErrorCode::DimensionMismatch, "sample dimensions disagree with dataset");
    out << fmt17(s.t);
    for (int i = 0; i < input_dim(); ++i) out << "," << fmt17(s.phi[i]);
    for (int i = 0; i < n; ++i) out << "," << fmt17(s.rdot[i]);
    for (int i = 0; i < input_dim(); ++i) out << "," << fmt17(s.xdot[i]);
    out << "\n";
  }
  if (!out) raise(ErrorCode::Io, "write failed: " + path);
  out.close();

  std::ofstream mf(path + ".meta", std::ios::trunc);
  if (!mf) raise(ErrorCode::Io, "cannot open for writing: " + path + ".meta");
  for (const auto& [k, v] : meta) mf << k << "=" << v << "\n";
  if (!mf) raise(ErrorCode::Io, "write failed: " + path + ".meta");
}

Dataset Dataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open: " + path);

  std::string header;
  if (!std::getline(in, header))
    raise(ErrorCode::CorruptPayload, "empty dataset: " + path);
  auto cols = split_csv(header);
  if (cols.empty() || cols[0] != "t")
    raise(ErrorCode::CorruptPayload, "bad dataset header: " + path);

  int nphi = 0, nrdot = 0, max_feat = -1, max_coord = -1;
  for (size_t i = 1; i < cols.size(); ++i) {
    const auto& c = cols[i];
    if (c.rfind("phi_", 0) == 0) {
      ++nphi;
    } else if (c.rfind("rdot_", 0) == 0) {
      ++nrdot;
    } else if (c.rfind("xdot_", 0) == 0) {
      int f, j;
      if (std::sscanf(c.c_str(), "xdot_%d_%d", &f, &j) != 2)
        raise(ErrorCode::CorruptPayload, "bad column name: " + c);
      max_feat = std::max(max_feat, f);
      max_coord = std::max(max_coord, j);
    } else {
      raise(ErrorCode::CorruptPayload, "unknown column: " + c);
    }
  }

  Dataset ds;
  ds.m = max_feat + 1;
  ds.l = max_coord + 1;
  ds.n = nrdot;
  if (ds.m < 1 || ds.l < 1 || ds.n < 1 || nphi != ds.input_dim())
    raise(ErrorCode::DimensionMismatch, "inconsistent dataset header: " + path);
  const size_t want = 1 + size_t(nphi) + nrdot + nphi;
  if (cols.size() != want)
    raise(ErrorCode::DimensionMismatch, "inconsistent dataset header: " + path);

  std::string line;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto vals = split_csv(line);
    if (vals.size() != want)
      raise(ErrorCode::CorruptPayload,
            "row " + std::to_string(lineno) + " has " +
                std::to_string(vals.size()) + " fields, expected " +
                std::to_string(want));
    const std::string where = path + ":" + std::to_string(lineno);
    TrainingSample s;
    s.t = parse_double(vals[0], where);
    s.phi.resize(nphi);
    s.rdot.resize(ds.n);
    s.xdot.resize(nphi);
    size_t v = 1;
    for (int i = 0; i < nphi; ++i) s.phi[i] = parse_double(vals[v++], where);
    for (int i = 0; i < ds.n; ++i) s.rdot[i] = parse_double(vals[v++], where);
    for (int i = 0; i < nphi; ++i) s.xdot[i] = parse_double(vals[v++], where);
    ds.samples.push_back(std::move(s));
  }

  std::ifstream mf(path + ".meta");
  if (mf) {
    std::string ml;
    while (std::getline(mf, ml)) {
      if (ml.empty()) continue;
      auto eq = ml.find('=');
      if (eq == std::string::npos)
        raise(ErrorCode::CorruptPayload, "bad meta line: " + ml);
      ds.meta[ml.substr(0, eq)] = ml.substr(eq + 1);
    }
  }
  return ds;
}

}  // namespace dlo

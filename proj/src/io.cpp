#include "evmt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace evmt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
    out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& msg) {
  throw InputError(source + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& cell, const std::string& source, long line,
                 const std::string& column) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    fail(source, line, "column '" + column + "': cannot parse '" + cell + "' as a number");
  return v;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

struct Reader {
  std::istream& in;
  std::string source;
  long line_no = 0;

  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!blank(line)) return true;
    }
    return false;
  }
};

}  // namespace

InputTable parse_table(std::istream& in, const std::string& source) {
  Reader rd{in, source};
  std::string line;
  if (!rd.next(line)) fail(source, 1, "missing header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split(line);
  const long header_line = rd.line_no;

  int col_p = -1, col_e = -1, col_g = -1, col_t = -1, col_w1 = -1, col_w2 = -1;
  std::vector<int> col_x;
  InputTable t;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const auto& h = header[static_cast<std::size_t>(c)];
    int* slot = h == "pvalue" ? &col_p
              : h == "evalue" ? &col_e
              : h == "group"  ? &col_g
              : h == "truth"  ? &col_t
              : h == "w1"     ? &col_w1
              : h == "w2"     ? &col_w2
                              : nullptr;
    if (slot) {
      if (*slot >= 0) fail(source, header_line, "duplicate column '" + h + "'");
      *slot = c;
    } else if (!h.empty() && h[0] == 'x') {
      col_x.push_back(c);
      t.covariate_names.push_back(h);
    } else {
      fail(source, header_line, "unknown column '" + h + "'");
    }
  }
  if (col_p < 0 && col_e < 0 && col_w1 < 0)
    fail(source, header_line, "need a 'pvalue', 'evalue' or 'w1' column");
  if (col_w2 >= 0 && col_w1 < 0) fail(source, header_line, "'w2' requires 'w1'");

  std::vector<double> p, e, w1, w2, x;
  std::vector<std::string> g;
  Truth truth;
  while (rd.next(line)) {
    const auto cells = split(line);
    if (cells.size() != header.size())
      fail(source, rd.line_no, "expected " + std::to_string(header.size()) +
                                   " fields, found " + std::to_string(cells.size()));
    const auto num = [&](int c) {
      return to_double(cells[static_cast<std::size_t>(c)], source, rd.line_no,
                       header[static_cast<std::size_t>(c)]);
    };
    if (col_p >= 0) {
      const double v = num(col_p);
      if (v < 0.0 || v > 1.0) fail(source, rd.line_no, "p-value outside [0, 1]");
      p.push_back(v);
    }
    if (col_e >= 0) {
      const double v = num(col_e);
      if (v < 0.0) fail(source, rd.line_no, "negative e-value");
      e.push_back(v);
    }
    if (col_w1 >= 0) w1.push_back(num(col_w1));
    if (col_w2 >= 0) w2.push_back(num(col_w2));
    if (col_g >= 0) {
      const auto& s = cells[static_cast<std::size_t>(col_g)];
      if (s.empty()) fail(source, rd.line_no, "empty group label");
      g.push_back(s);
    }
    if (col_t >= 0) {
      const auto& s = cells[static_cast<std::size_t>(col_t)];
      if (s != "0" && s != "1") fail(source, rd.line_no, "truth must be 0 or 1");
      truth.push_back(s == "1");
    }
    for (int c : col_x) x.push_back(num(c));
  }
  const auto n = static_cast<Index>(std::max({p.size(), e.size(), w1.size()}));
  if (n == 0) fail(source, rd.line_no + 1, "no data rows");
  t.rows = n;

  const auto vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  if (col_p >= 0) t.pvals = PValueSet(vec(p));
  if (col_e >= 0) t.evalues = EValueSet(vec(e));
  if (col_w1 >= 0) t.w1 = KnockoffStatSet(vec(w1));
  if (col_w2 >= 0) t.w2 = KnockoffStatSet(vec(w2));
  if (col_g >= 0) t.groups = GroupPartition::from_names(g);
  if (col_t >= 0) t.truth = std::move(truth);
  if (!col_x.empty()) {
    const auto d = static_cast<Index>(col_x.size());
    t.covars = CovariateSet(
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(x.data(), n, d));
  }
  return t;
}

InputTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_table(in, path.string());
}

RejectionSet RejectionRows::rejection_set() const {
  std::vector<Index> idx;
  for (Index i = 0; i < size(); ++i)
    if (rejected[static_cast<std::size_t>(i)]) idx.push_back(i);
  return RejectionSet(std::move(idx));
}

RejectionRows make_rows(Index n, const RejectionSet& rejected,
                        const std::optional<EValueSet>& evalues,
                        const std::optional<Vector>& weights) {
  RejectionRows rows;
  rows.rejected.assign(static_cast<std::size_t>(n), 0);
  for (Index i : rejected.indices()) {
    if (i < 0 || i >= n) throw InputError("rejection index out of range");
    rows.rejected[static_cast<std::size_t>(i)] = 1;
  }
  if (evalues) {
    if (evalues->size() != n) throw InputError("e-value count differs from row count");
    rows.evalues = evalues->values();
  }
  if (weights) {
    if (weights->size() != n) throw InputError("weight count differs from row count");
    rows.weights = *weights;
  }
  return rows;
}

void write_rejections(std::ostream& out, const RejectionRows& rows) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "index,rejected,evalue,weight\n";
  for (Index i = 0; i < rows.size(); ++i) {
    out << i << ',' << int(rows.rejected[static_cast<std::size_t>(i)]) << ',';
    if (rows.evalues) out << (*rows.evalues)[i];
    out << ',';
    if (rows.weights) out << (*rows.weights)[i];
    out << '\n';
  }
  out.precision(old);
}

RejectionRows parse_rejections(std::istream& in, const std::string& source) {
  Reader rd{in, source};
  std::string line;
  if (!rd.next(line) || trim(line) != "index,rejected,evalue,weight")
    fail(source, rd.line_no, "expected header 'index,rejected,evalue,weight'");
  RejectionRows rows;
  std::vector<double> e, w;
  bool has_e = true, has_w = true;
  while (rd.next(line)) {
    const auto cells = split(line);
    if (cells.size() != 4) fail(source, rd.line_no, "expected 4 fields");
    if (cells[0] != std::to_string(rows.size()))
      fail(source, rd.line_no, "index out of sequence");
    if (cells[1] != "0" && cells[1] != "1")
      fail(source, rd.line_no, "rejected must be 0 or 1");
    rows.rejected.push_back(cells[1] == "1");
    const bool first = rows.rejected.size() == 1;
    if (first) {
      has_e = !cells[2].empty();
      has_w = !cells[3].empty();
    }
    if (has_e != !cells[2].empty() || has_w != !cells[3].empty())
      fail(source, rd.line_no, "evalue/weight cells must be all present or all empty");
    if (has_e) e.push_back(to_double(cells[2], source, rd.line_no, "evalue"));
    if (has_w) w.push_back(to_double(cells[3], source, rd.line_no, "weight"));
  }
  if (rows.rejected.empty()) fail(source, rd.line_no + 1, "no data rows");
  if (has_e) rows.evalues = Eigen::Map<const Vector>(e.data(), static_cast<Index>(e.size()));
  if (has_w) rows.weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  return rows;
}

}  // namespace evmt

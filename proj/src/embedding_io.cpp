#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include "isgns/errors.hpp"
#include "isgns/sgns_core.hpp"

namespace isgns {

namespace {

void save_rows(const EmbeddingModel& m, std::ostream& out, bool context) {
  out << m.size() << ' ' << m.dim() << '\n';
  for (std::size_t r = 0; r < m.size(); ++r) {
    out << m.label(r);
    for (double x : context ? m.context(r) : m.target(r)) out << ' ' << format_double(x);
    out << '\n';
  }
}

struct Rows {
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::vector<double> values;
};

template <typename T>
T parse_number(const std::string& tok, std::size_t line) {
  T x{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || p != tok.data() + tok.size()) throw ParseError(line, "bad number '" + tok + "'");
  return x;
}

Rows read_rows(std::istream& in) {
  Rows rows;
  std::string line, tok;
  std::size_t lineno = 0;
  std::size_t count = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (!(ls >> tok)) continue;
    if (!header) {
      count = parse_number<std::size_t>(tok, lineno);
      std::string d, extra;
      if (!(ls >> d) || (ls >> extra)) throw ParseError(lineno, "header must be '<vertices> <dim>'");
      rows.dim = parse_number<std::size_t>(d, lineno);
      if (rows.dim == 0) throw ParseError(lineno, "dimension must be positive");
      header = true;
      continue;
    }
    if (rows.labels.size() == count) throw ParseError(lineno, "more rows than the header declares");
    rows.labels.push_back(tok);
    std::size_t n = 0;
    while (ls >> tok) {
      rows.values.push_back(parse_number<double>(tok, lineno));
      ++n;
    }
    if (n != rows.dim) {
      throw ParseError(lineno, "expected " + std::to_string(rows.dim) + " values, got " + std::to_string(n));
    }
  }
  if (!header) throw ParseError(0, "missing header");
  if (rows.labels.size() != count) {
    throw ParseError(0, "header declares " + std::to_string(count) + " rows, found " +
                            std::to_string(rows.labels.size()));
  }
  return rows;
}

}  // namespace

void save_embeddings(const EmbeddingModel& m, std::ostream& out) { save_rows(m, out, false); }

void save_context(const EmbeddingModel& m, std::ostream& out) { save_rows(m, out, true); }

EmbeddingModel load_embeddings(std::istream& in) {
  const Rows rows = read_rows(in);
  EmbeddingModel m(rows.dim);
  const std::vector<double> zero(rows.dim, 0.0);
  for (std::size_t r = 0; r < rows.labels.size(); ++r) {
    if (m.contains(rows.labels[r])) throw ParseError(0, "duplicate vertex '" + rows.labels[r] + "'");
    m.add_row(rows.labels[r], std::span(rows.values).subspan(r * rows.dim, rows.dim), zero);
  }
  return m;
}

EmbeddingModel load_model(std::istream& target_in, std::istream& context_in) {
  const Rows t = read_rows(target_in);
  const Rows c = read_rows(context_in);
  if (t.dim != c.dim || t.labels != c.labels) throw ParseError(0, "context sidecar does not match the embeddings");
  EmbeddingModel m(t.dim);
  for (std::size_t r = 0; r < t.labels.size(); ++r) {
    if (m.contains(t.labels[r])) throw ParseError(0, "duplicate vertex '" + t.labels[r] + "'");
    m.add_row(t.labels[r], std::span(t.values).subspan(r * t.dim, t.dim),
              std::span(c.values).subspan(r * c.dim, c.dim));
  }
  return m;
}

}  // namespace isgns

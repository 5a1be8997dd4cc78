#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nmvm/errors.hpp"
#include "nmvm/fit.hpp"

namespace nmvm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool is_missing(const std::string& cell) {
  if (cell.empty()) return true;
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "na" || lower == "nan" || lower == "null";
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int parts[3];
  const std::pair<int, int> spans[3] = {{0, 4}, {5, 2}, {8, 2}};
  for (int i = 0; i < 3; ++i) {
    const char* first = s.data() + spans[i].first;
    const char* last = first + spans[i].second;
    auto [ptr, ec] = std::from_chars(first, last, parts[i]);
    if (ec != std::errc() || ptr != last) return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(parts[0]),
                                        std::chrono::month(static_cast<unsigned>(parts[1])),
                                        std::chrono::day(static_cast<unsigned>(parts[2]))};
  return ymd.ok();
}

double parse_price(const std::string& cell, std::size_t line, const std::string& asset) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("cannot parse price '" + cell + "' for " + asset, line);
  }
  if (!(value > 0.0)) {
    throw ParseError("non-positive price " + cell + " for " + asset, line);
  }
  return value;
}

}  // namespace

ReturnsMatrix parse_prices(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  ReturnsMatrix rm;

  // Header, skipping blank lines and a UTF-8 byte order mark.
  for (;;) {
    if (!std::getline(in, line)) throw ParseError("empty price file", line_no);
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv(line);
  std::string first = header.front();
  std::transform(first.begin(), first.end(), first.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (first != "date") throw ParseError("header must start with 'date'", line_no);
  if (header.size() < 2) throw ParseError("header lists no assets", line_no);
  rm.assets.assign(header.begin() + 1, header.end());
  for (const auto& name : rm.assets) {
    if (name.empty()) throw ParseError("empty asset name in header", line_no);
  }
  const std::size_t n = rm.assets.size();

  std::vector<std::string> kept_dates;
  std::vector<std::vector<double>> kept_prices;
  std::string last_date;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != n + 1) {
      throw ParseError("expected " + std::to_string(n + 1) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    const std::string& date = cells.front();
    if (!is_iso_date(date)) throw ParseError("invalid ISO-8601 date '" + date + "'", line_no);
    if (!last_date.empty() && date <= last_date) {
      throw ParseError("dates must be strictly ascending ('" + date + "' after '" +
                           last_date + "')",
                       line_no);
    }
    last_date = date;
    if (std::any_of(cells.begin() + 1, cells.end(), is_missing)) {
      ++rm.dropped_rows;
      continue;
    }
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = parse_price(cells[j + 1], line_no, rm.assets[j]);
    kept_dates.push_back(date);
    kept_prices.push_back(std::move(row));
  }
  if (kept_prices.size() < 2) {
    throw InputError("need at least two complete price rows to form a return");
  }

  const std::size_t t = kept_prices.size() - 1;
  rm.values.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
  rm.dates.assign(kept_dates.begin() + 1, kept_dates.end());
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      rm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::log(kept_prices[i + 1][j] / kept_prices[i][j]);
    }
  }
  return rm;
}

ReturnsMatrix load_prices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open price file '" + path + "'");
  return parse_prices(in);
}

std::vector<AssetSummary> summarize(const ReturnsMatrix& rm) {
  const Eigen::Index t = rm.values.rows();
  if (t < 2) throw InputError("summary needs at least two returns per asset");
  std::vector<AssetSummary> out;
  for (Eigen::Index j = 0; j < rm.values.cols(); ++j) {
    const auto col = rm.values.col(j);
    AssetSummary s;
    s.asset = j < static_cast<Eigen::Index>(rm.assets.size())
                  ? rm.assets[static_cast<std::size_t>(j)]
                  : "asset" + std::to_string(j + 1);
    s.mean = col.mean();
    s.std_dev = std::sqrt((col.array() - s.mean).square().sum() / static_cast<double>(t - 1));
    s.min = col.minCoeff();
    s.max = col.maxCoeff();
    out.push_back(s);
  }
  return out;
}

}  // namespace nmvm

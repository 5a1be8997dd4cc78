#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "nmvm/errors.hpp"
#include "nmvm/model_io.hpp"

namespace nmvm {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
  if (key != nullptr) out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (key != nullptr || i > 0) out << ' ';
    out << fmt(v(i));
  }
  out << '\n';
}

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    Line line{number, {}};
    for (std::string tok; ss >> tok;) line.tokens.push_back(tok);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

double to_real(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("not a number: '" + tok + "'", line);
  return v;
}

class Reader {
 public:
  explicit Reader(std::vector<Line> lines) : lines_(std::move(lines)) {}

  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line_number() const {
    return done() ? (lines_.empty() ? 0 : lines_.back().number) : lines_[pos_].number;
  }

  const Line& expect(const std::string& key) {
    if (done()) throw ParseError("unexpected end of file, expected '" + key + "'", line_number());
    const Line& line = lines_[pos_];
    if (line.tokens.front() != key) {
      throw ParseError("expected '" + key + "', found '" + line.tokens.front() + "'", line.number);
    }
    ++pos_;
    return line;
  }

  const Line& next() {
    if (done()) throw ParseError("unexpected end of file", line_number());
    return lines_[pos_++];
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

Eigen::VectorXd read_values(const Line& line, std::size_t skip, Eigen::Index n) {
  const std::size_t have = line.tokens.size() - skip;
  if (have != static_cast<std::size_t>(n)) {
    throw ParseError("expected " + std::to_string(n) + " values, found " + std::to_string(have),
                     line.number);
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = to_real(line.tokens[skip + static_cast<std::size_t>(i)], line.number);
  }
  return v;
}

double read_param(Reader& r, const std::string& key) {
  const Line& line = r.expect(key);
  return read_values(line, 1, 1)(0);
}

}  // namespace

void write_model(std::ostream& out, const NmvmModel& model) {
  const Eigen::Index n = model.dim();
  out << "nmvm-model " << kModelSchemaVersion << '\n';
  out << "dimension " << n << '\n';
  write_row(out, "mu", model.mu);
  write_row(out, "gamma", model.gamma);
  out << "sigma\n";
  for (Eigen::Index i = 0; i < n; ++i) write_row(out, nullptr, model.sigma.row(i).transpose());
  out << "mixing " << family_name(model.mixing) << '\n';
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Gig>) {
          out << "lambda " << fmt(law.lambda) << "\nchi " << fmt(law.chi) << "\npsi "
              << fmt(law.psi) << '\n';
        } else if constexpr (std::is_same_v<T, Gamma>) {
          out << "shape " << fmt(law.shape) << "\nrate " << fmt(law.rate) << '\n';
        } else if constexpr (std::is_same_v<T, InverseGaussian>) {
          out << "delta " << fmt(law.delta) << "\ngamma " << fmt(law.gamma_ig) << '\n';
        }
      },
      model.mixing);
}

NmvmModel read_model(std::istream& in) {
  Reader r(tokenize(in));
  const Line& header = r.expect("nmvm-model");
  if (header.tokens.size() != 2) throw ParseError("header needs a schema version", header.number);
  if (header.tokens[1] != std::to_string(kModelSchemaVersion)) {
    throw ParseError("unsupported schema version " + header.tokens[1] + " (expected " +
                         std::to_string(kModelSchemaVersion) + ")",
                     header.number);
  }
  const Line& dim_line = r.expect("dimension");
  int n = 0;
  {
    const std::string& tok = dim_line.tokens.size() == 2 ? dim_line.tokens[1] : std::string();
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || n < 1) {
      throw ParseError("dimension must be a positive integer", dim_line.number);
    }
  }
  NmvmModel model;
  model.mu = read_values(r.expect("mu"), 1, n);
  model.gamma = read_values(r.expect("gamma"), 1, n);
  const Line& sigma_line = r.expect("sigma");
  if (sigma_line.tokens.size() != 1) {
    throw ParseError("'sigma' is followed by its rows on separate lines", sigma_line.number);
  }
  model.sigma.resize(n, n);
  for (int i = 0; i < n; ++i) model.sigma.row(i) = read_values(r.next(), 0, n).transpose();

  if (r.done()) throw ParseError("missing mixing block", r.line_number());
  const Line& mix = r.expect("mixing");
  if (mix.tokens.size() != 2) throw ParseError("'mixing' needs a family name", mix.number);
  const std::string& family = mix.tokens[1];
  if (family == "gig") {
    const double lambda = read_param(r, "lambda");
    const double chi = read_param(r, "chi");
    const double psi = read_param(r, "psi");
    model.mixing = Gig{lambda, chi, psi};
  } else if (family == "gamma") {
    const double shape = read_param(r, "shape");
    const double rate = read_param(r, "rate");
    model.mixing = Gamma{shape, rate};
  } else if (family == "inverse_gaussian") {
    const double delta = read_param(r, "delta");
    const double g = read_param(r, "gamma");
    model.mixing = InverseGaussian{delta, g};
  } else if (family == "exponential") {
    model.mixing = Exponential{};
  } else if (family == "degenerate") {
    model.mixing = Degenerate{};
  } else {
    throw ParseError("unknown mixing family '" + family + "'", mix.number);
  }
  if (!r.done()) throw ParseError("unexpected trailing content", r.line_number());
  model.validate();
  return model;
}

void save_model(const std::string& path, const NmvmModel& model) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file '" + path + "'");
  write_model(out, model);
  if (!out) throw InputError("failed writing model file '" + path + "'");
}

NmvmModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace nmvm

#include "hswift/quotes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "hswift/errors.hpp"

namespace hswift {

using nlohmann::json;

OptionKind parse_option_kind(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "call" || lower == "c") return OptionKind::call;
  if (lower == "put" || lower == "p") return OptionKind::put;
  throw InvalidInput("unknown option kind '" + text + "' (expected call or put)");
}

const char* to_string(OptionKind kind) { return kind == OptionKind::call ? "call" : "put"; }

void OptionQuote::validate() const {
  if (!(strike > 0.0) || !std::isfinite(strike)) throw InvalidInput("strike must be positive");
  if (!(maturity > 0.0) || !std::isfinite(maturity))
    throw InvalidInput("maturity must be positive");
  if (price && !(std::isfinite(*price) && *price >= 0.0))
    throw InvalidInput("observed price must be finite and nonnegative");
}

double put_from_call(double call, double strike, double tau, const MarketContext& ctx) {
  return call - ctx.spot * std::exp(-ctx.dividend * tau) + strike * std::exp(-ctx.rate * tau);
}

double call_from_put(double put, double strike, double tau, const MarketContext& ctx) {
  return put + ctx.spot * std::exp(-ctx.dividend * tau) - strike * std::exp(-ctx.rate * tau);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail_at(int line, const std::string& what) {
  throw InvalidInput("line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& text, int line, const char* field) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    fail_at(line, std::string("cannot parse ") + field + " '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// "%.17g" round-trips every double.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

QuoteFile parse_text(const std::string& content) {
  QuoteFile file;
  std::istringstream in(content);
  std::string raw;
  int line = 0;
  bool in_records = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;

    const auto eq = text.find('=');
    if (eq != std::string::npos) {
      if (in_records) fail_at(line, "header entry after quote records");
      const std::string key = lowercase(trim(text.substr(0, eq)));
      const std::string value = trim(text.substr(eq + 1));
      if (key == "spot") {
        file.context.spot = parse_number(value, line, "spot");
      } else if (key == "rate") {
        file.context.rate = parse_number(value, line, "rate");
      } else if (key == "dividend") {
        file.context.dividend = parse_number(value, line, "dividend");
      } else {
        fail_at(line, "unknown header key '" + key + "'");
      }
      continue;
    }

    if (lowercase(text).rfind("maturity", 0) == 0) continue;  // column header
    in_records = true;
    const auto fields = split(text, ',');
    if (fields.size() < 3 || fields.size() > 4)
      fail_at(line, "expected maturity,strike,kind[,price]");
    OptionQuote q;
    q.maturity = parse_number(fields[0], line, "maturity");
    q.strike = parse_number(fields[1], line, "strike");
    try {
      q.kind = parse_option_kind(fields[2]);
    } catch (const InvalidInput& e) {
      fail_at(line, e.what());
    }
    if (fields.size() == 4 && !fields[3].empty()) q.price = parse_number(fields[3], line, "price");
    try {
      q.validate();
    } catch (const InvalidInput& e) {
      fail_at(line, e.what());
    }
    file.quotes.push_back(q);
  }
  return file;
}

QuoteFile parse_json(const std::string& content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("JSON: ") + e.what());
  }
  QuoteFile file;
  try {
    if (doc.contains("context")) {
      const json& c = doc.at("context");
      file.context.spot = c.value("spot", 1.0);
      file.context.rate = c.value("rate", 0.0);
      file.context.dividend = c.value("dividend", 0.0);
    }
    int index = 0;
    for (const json& item : doc.at("quotes")) {
      OptionQuote q;
      q.maturity = item.at("maturity").get<double>();
      q.strike = item.at("strike").get<double>();
      q.kind = parse_option_kind(item.value("kind", std::string("call")));
      if (item.contains("price") && !item.at("price").is_null())
        q.price = item.at("price").get<double>();
      try {
        q.validate();
      } catch (const InvalidInput& e) {
        throw InvalidInput("quote " + std::to_string(index) + ": " + e.what());
      }
      file.quotes.push_back(q);
      ++index;
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("JSON: ") + e.what());
  }
  return file;
}

}  // namespace

void QuoteFile::validate() const {
  context.validate();
  std::set<std::tuple<double, double, int>> seen;
  for (const auto& q : quotes) {
    q.validate();
    if (!seen.emplace(q.maturity, q.strike, static_cast<int>(q.kind)).second)
      throw InvalidInput("duplicate quote: maturity " + fmt(q.maturity) + ", strike " +
                         fmt(q.strike) + ", " + to_string(q.kind));
  }
}

std::vector<double> QuoteFile::maturities() const {
  std::vector<double> out;
  for (const auto& q : quotes)
    if (std::find(out.begin(), out.end(), q.maturity) == out.end()) out.push_back(q.maturity);
  return out;
}

QuoteFile parse_quote_file(const std::string& content) {
  const auto first = content.find_first_not_of(" \t\r\n");
  QuoteFile file = (first != std::string::npos && content[first] == '{') ? parse_json(content)
                                                                          : parse_text(content);
  file.validate();
  return file;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QuoteFile read_quote_file(const std::string& path) {
  try {
    return parse_quote_file(read_text_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

std::string format_quote_file(const QuoteFile& file, FileFormat format) {
  if (format == FileFormat::json) {
    json doc;
    doc["context"] = {{"spot", file.context.spot},
                      {"rate", file.context.rate},
                      {"dividend", file.context.dividend}};
    doc["quotes"] = json::array();
    for (const auto& q : file.quotes) {
      json item = {{"maturity", q.maturity}, {"strike", q.strike}, {"kind", to_string(q.kind)}};
      if (q.price) item["price"] = *q.price;
      doc["quotes"].push_back(item);
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "spot = " << fmt(file.context.spot) << "\n";
  out << "rate = " << fmt(file.context.rate) << "\n";
  out << "dividend = " << fmt(file.context.dividend) << "\n";
  out << "maturity,strike,kind,price\n";
  for (const auto& q : file.quotes) {
    out << fmt(q.maturity) << ',' << fmt(q.strike) << ',' << to_string(q.kind);
    if (q.price) out << ',' << fmt(*q.price);
    out << "\n";
  }
  return out.str();
}

void write_quote_file(const std::string& path, const QuoteFile& file, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << format_quote_file(file, format);
}

HestonParams parse_params(const std::string& content) {
  HestonParams theta;
  bool have[5] = {false, false, false, false, false};
  auto assign = [&](const std::string& key, double value, int line) {
    static const char* names[5] = {"kappa", "v_bar", "sigma", "rho", "v0"};
    double* slots[5] = {&theta.kappa, &theta.v_bar, &theta.sigma, &theta.rho, &theta.v0};
    for (int i = 0; i < 5; ++i) {
      if (key == names[i]) {
        *slots[i] = value;
        have[i] = true;
        return;
      }
    }
    fail_at(line, "unknown parameter '" + key + "'");
  };

  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    try {
      const json doc = json::parse(content);
      for (const auto& [key, value] : doc.items()) assign(key, value.get<double>(), 1);
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("JSON: ") + e.what());
    }
  } else {
    std::istringstream in(content);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string text = trim(raw.substr(0, raw.find('#')));
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) fail_at(line, "expected key = value");
      const std::string key = lowercase(trim(text.substr(0, eq)));
      assign(key, parse_number(trim(text.substr(eq + 1)), line, key.c_str()), line);
    }
  }
  for (bool h : have)
    if (!h) throw InvalidInput("parameter file needs kappa, v_bar, sigma, rho and v0");
  theta.validate();
  return theta;
}

HestonParams read_params_file(const std::string& path) {
  try {
    return parse_params(read_text_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

std::string format_params(const HestonParams& theta) {
  return "kappa = " + fmt(theta.kappa) + "\nv_bar = " + fmt(theta.v_bar) +
         "\nsigma = " + fmt(theta.sigma) + "\nrho = " + fmt(theta.rho) + "\nv0 = " + fmt(theta.v0) +
         "\n";
}

}  // namespace hswift

#include "sdx/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sdx/errors.hpp"

namespace sdx::io {
namespace {

using nlohmann::json;

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) throw ParseError("key '" + key + "': expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number())
      throw ParseError("key '" + key + "': entry " + std::to_string(k) + " is not a number");
    out.push_back(j[k].get<double>());
  }
  return out;
}

std::size_t dimension(const json& root) {
  const json& n = require(root, "n", "instance");
  if (!n.is_number_integer() || n.get<long long>() < 1)
    throw ParseError("key 'n': expected a positive integer");
  return static_cast<std::size_t>(n.get<long long>());
}

Vector to_vector(const std::vector<double>& v, std::size_t n, const std::string& key) {
  if (v.size() != n)
    throw ParseError("key '" + key + "': expected " + std::to_string(n) + " entries, got " +
                     std::to_string(v.size()));
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out(i) = v[i];
  return out;
}

SymMatrix to_sym(const std::vector<double>& v, std::size_t n, const std::string& key) {
  if (v.size() != n * (n + 1) / 2)
    throw ParseError("key '" + key + "': expected " + std::to_string(n * (n + 1) / 2) +
                     " upper-triangle entries, got " + std::to_string(v.size()));
  return SymMatrix::from_upper(n, v);
}

json upper(const SymMatrix& s) {
  json arr = json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i; j < s.size(); ++j) arr.push_back(s(i, j));
  return arr;
}

json vec(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

bqp::BqpInstance make_bqp(std::vector<double> c, std::vector<double> coff,
                          std::vector<double> cdiag) {
  try {
    return bqp::BqpInstance(std::move(c), std::move(coff), std::move(cdiag));
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

AnyInstance parse_instance(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at " + line_col(text, e.byte) + ": " + e.what());
  }
  if (!root.is_object()) throw ParseError("instance: top level must be an object");
  const std::size_t n = dimension(root);

  if (root.contains("objective")) {
    const json& obj = root["objective"];
    QcqpInstance q;
    q.objective.C = to_sym(numbers(require(obj, "C", "objective"), "objective.C"), n,
                           "objective.C");
    q.objective.c = to_vector(numbers(require(obj, "c", "objective"), "objective.c"), n,
                              "objective.c");
    const json& cons = require(root, "constraints", "instance");
    if (!cons.is_array() || cons.empty())
      throw ParseError("key 'constraints': expected a non-empty array");
    for (std::size_t k = 0; k < cons.size(); ++k) {
      const std::string where = "constraints[" + std::to_string(k) + "]";
      QuadraticPolynomial f;
      f.A = to_sym(numbers(require(cons[k], "A", where), where + ".A"), n, where + ".A");
      f.a = to_vector(numbers(require(cons[k], "a", where), where + ".a"), n, where + ".a");
      const json& alpha = require(cons[k], "alpha", where);
      if (!alpha.is_number()) throw ParseError("key '" + where + ".alpha': expected a number");
      f.alpha = alpha.get<double>();
      q.constraints.push_back(std::move(f));
    }
    return q;
  }

  std::vector<double> c = numbers(require(root, "c", "instance"), "c");
  if (c.size() != n)
    throw ParseError("key 'c': expected " + std::to_string(n) + " entries, got " +
                     std::to_string(c.size()));
  std::vector<double> coff = numbers(require(root, "coff", "instance"), "coff");
  if (coff.size() != n * (n - 1) / 2)
    throw ParseError("key 'coff': expected " + std::to_string(n * (n - 1) / 2) +
                     " entries, got " + std::to_string(coff.size()));
  std::vector<double> cdiag;
  if (root.contains("cdiag")) cdiag = numbers(root["cdiag"], "cdiag");
  return make_bqp(std::move(c), std::move(coff), std::move(cdiag));
}

AnyInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_instance(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

bqp::BqpInstance parse_inline(std::string_view spec) {
  std::vector<double> c;
  std::vector<double> coff;
  std::vector<double> cdiag;
  bool have_c = false;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    const std::size_t end = std::min(spec.find(';', pos), spec.size());
    const std::string_view part = spec.substr(pos, end - pos);
    pos = end + 1;
    if (part.empty()) continue;
    const std::size_t eq = part.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("inline instance: expected key=values in '" + std::string(part) + "'");
    const std::string key(part.substr(0, eq));
    std::vector<double>* target = nullptr;
    if (key == "c") {
      target = &c;
      have_c = true;
    } else if (key == "coff") {
      target = &coff;
    } else if (key == "cdiag") {
      target = &cdiag;
    } else {
      throw ParseError("inline instance: unknown key '" + key + "'");
    }
    std::stringstream vals{std::string(part.substr(eq + 1))};
    std::string tok;
    while (std::getline(vals, tok, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        target->push_back(v);
      } catch (const std::exception&) {
        throw ParseError("inline instance: key '" + key + "': bad number '" + tok + "'");
      }
    }
  }
  if (!have_c) throw ParseError("inline instance: missing key 'c'");
  return make_bqp(std::move(c), std::move(coff), std::move(cdiag));
}

std::string to_json(const bqp::BqpInstance& inst) {
  json j;
  j["n"] = inst.n();
  j["c"] = inst.c();
  j["coff"] = inst.coff();
  if (!inst.cdiag().empty()) j["cdiag"] = inst.cdiag();
  return j.dump(2);
}

std::string to_json(const QcqpInstance& inst) {
  json j;
  j["n"] = inst.n();
  j["objective"] = {{"C", upper(inst.objective.C)}, {"c", vec(inst.objective.c)}};
  j["constraints"] = json::array();
  for (const auto& f : inst.constraints)
    j["constraints"].push_back({{"A", upper(f.A)}, {"a", vec(f.a)}, {"alpha", f.alpha}});
  return j.dump(2);
}

std::string to_json(const AnyInstance& inst) {
  return std::visit([](const auto& i) { return to_json(i); }, inst);
}

QcqpInstance as_qcqp(const AnyInstance& inst) {
  if (const auto* b = std::get_if<bqp::BqpInstance>(&inst)) return b->to_qcqp();
  return std::get<QcqpInstance>(inst);
}

}  // namespace sdx::io

#include "smtpcps/controller.hpp"
#include "smtpcps/errors.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace smtpcps {

namespace {

constexpr const char* kHeader = "ctrlfam v1";

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    throw FormatError(where + ": bad number '" + token + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  return {std::istream_iterator<std::string>(is), std::istream_iterator<std::string>()};
}

// "key=value" with the expected key
std::string keyed(const std::string& token, const std::string& key) {
  if (token.rfind(key + "=", 0) != 0) throw FormatError("ctrlfam header: expected " + key + "=...");
  return token.substr(key.size() + 1);
}

}  // namespace

void write_family(std::ostream& os, const ControllableFamily& fam) {
  if (fam.sets.empty() || fam.eroded.size() + 1 != fam.sets.size()) {
    throw ContractViolation("write_family: family is incomplete");
  }
  std::ostringstream body;
  body << kHeader << " N=" << fam.horizon() << " umax=" << num(fam.u_max) << " alphamax=" << num(fam.alpha_max)
       << "\n";
  body << "K";
  for (Eigen::Index i = 0; i < fam.gain.K.size(); ++i) body << ' ' << num(fam.gain.K(i));
  body << "\n";
  for (std::size_t i = 0; i < fam.sets.size(); ++i) {
    write_polytope(body, fam.sets[i]);
    if (i < fam.eroded.size()) write_polytope(body, fam.eroded[i]);
  }
  const std::string text = body.str();
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016" PRIx64, fnv1a(text));
  os << text << "checksum " << sum << "\n";
}

ControllableFamily read_family(std::istream& is, const LinearModel& model, const Polytope& disturbance) {
  const std::string all{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};

  // the checksum line is the last line; everything before it is hashed
  std::string trimmed = all;
  while (!trimmed.empty() && trimmed.back() == '\n') trimmed.pop_back();
  const auto cut = trimmed.rfind('\n');
  if (cut == std::string::npos) throw FormatError("ctrlfam: file too short");
  const std::string body = trimmed.substr(0, cut + 1);
  const auto tail = split(trimmed.substr(cut + 1));
  if (tail.size() != 2 || tail[0] != "checksum") throw FormatError("ctrlfam: missing checksum line");
  char expected[32];
  std::snprintf(expected, sizeof expected, "%016" PRIx64, fnv1a(body));
  if (tail[1] != expected) throw FormatError("ctrlfam: checksum mismatch, the cache was modified or truncated");

  std::istringstream lines(body);
  std::string line;
  std::getline(lines, line);
  const auto head = split(line);
  if (head.size() != 5 || head[0] + " " + head[1] != kHeader) throw FormatError("ctrlfam: bad header line");

  ControllableFamily fam;
  fam.model = model;
  fam.disturbance = disturbance;
  const std::string n_text = keyed(head[2], "N");
  char* end = nullptr;
  const long horizon = std::strtol(n_text.c_str(), &end, 10);
  if (n_text.empty() || *end != '\0' || horizon < 1) throw FormatError("ctrlfam header: bad N");
  fam.u_max = parse_double(keyed(head[3], "umax"), "ctrlfam header");
  fam.alpha_max = parse_double(keyed(head[4], "alphamax"), "ctrlfam header");

  std::getline(lines, line);
  const auto k_tokens = split(line);
  const int dim = model.state_dim();
  if (k_tokens.size() != static_cast<std::size_t>(dim + 1) || k_tokens[0] != "K") {
    throw FormatError("ctrlfam: bad K line");
  }
  fam.gain.K.resize(dim);
  for (int i = 0; i < dim; ++i) fam.gain.K(i) = parse_double(k_tokens[static_cast<std::size_t>(i + 1)], "ctrlfam K");

  std::vector<Polytope> blocks;
  std::vector<std::vector<double>> rows;
  bool open = false;
  int line_no = 2;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line == "polytope v1") {
      if (open) blocks.push_back(parse_polytope_rows(rows, dim));
      rows.clear();
      open = true;
      continue;
    }
    if (!open) throw FormatError("ctrlfam line " + std::to_string(line_no) + ": data outside a polytope block");
    std::vector<double> row;
    for (const auto& t : split(line)) row.push_back(parse_double(t, "ctrlfam line " + std::to_string(line_no)));
    rows.push_back(std::move(row));
  }
  if (open) blocks.push_back(parse_polytope_rows(rows, dim));

  const std::size_t want = 2 * static_cast<std::size_t>(horizon) + 1;
  if (blocks.size() != want) {
    throw FormatError("ctrlfam: expected " + std::to_string(want) + " polytope blocks, found " +
                      std::to_string(blocks.size()));
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i % 2 == 0) {
      fam.sets.push_back(std::move(blocks[i]));
    } else {
      fam.eroded.push_back(std::move(blocks[i]));
    }
  }
  return fam;
}

}  // namespace smtpcps

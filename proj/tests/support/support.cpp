#include "support.hpp"

#include <gmpxx.h>
#include <mpfr.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

namespace cvtest {

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "cellvault-test-XXXXXX").string();
  if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::permissions(path_, std::filesystem::perms::owner_all, std::filesystem::perm_options::add, ec);
  std::filesystem::remove_all(path_, ec);
}

Clock counting_clock() {
  auto counter = std::make_shared<int>(0);
  return [counter] {
    int n = (*counter)++;
    char buf[64];
    std::snprintf(buf, sizeof buf, "2026-01-01T%02d:%02d:%02d.000Z", (n / 3600) % 24, (n / 60) % 60, n % 60);
    return std::string(buf);
  };
}

Cell num(double v, std::optional<std::string> formula) { return Cell(CellValue::number(v), std::move(formula)); }
Cell txt(std::string v, std::optional<std::string> formula) {
  return Cell(CellValue::text(std::move(v)), std::move(formula));
}

Sheet make_sheet(const std::string& name, const std::vector<CellSpec>& cells) {
  Sheet sheet(name);
  for (const auto& c : cells) sheet.put({c.row, c.col}, c.cell);
  return sheet;
}

WorkbookSnapshot one_sheet(const std::string& name, const std::vector<CellSpec>& cells) {
  return WorkbookSnapshot(std::vector<Sheet>{make_sheet(name, cells)});
}

WorkbookSnapshot single_value(double v) { return one_sheet("S", {{1, 1, num(v)}}); }

namespace {

const std::array<std::string, 5> kSheetNames = {"Alpha", "Beta", "Data 1", "Gamma", "\xCE\xA9mega"};
const std::array<std::string, 6> kTexts = {"", "abc", "say \"hi\"", "tab\there", "line\nbreak", "\xE2\x82\xAC 5"};
const std::array<std::string, 4> kFormulas = {"=A1+1", "=SUM(A1:A3)", "=B2*2", "=IF(A1>0,\"y\",\"n\")"};

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const std::array<T, N>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

Cell random_cell(std::mt19937_64& rng) {
  std::optional<std::string> formula;
  if (chance(rng, 0.2)) formula = pick(rng, kFormulas);
  CellValue v = random_value(rng);
  if (v.is_empty() && !formula) v = CellValue::number(1);
  return Cell(v, formula);
}

std::uint32_t coord(std::mt19937_64& rng, std::uint32_t dim) {
  return std::uniform_int_distribution<std::uint32_t>(1, dim)(rng);
}

}  // namespace

CellValue random_value(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
    case 0: return CellValue::empty();
    case 1: return CellValue::text(pick(rng, kTexts));
    case 2: return CellValue::boolean(chance(rng, 0.5));
    case 3: return CellValue::error(static_cast<ErrorLiteral>(std::uniform_int_distribution<int>(0, 6)(rng)));
    case 4: return CellValue::number(std::uniform_real_distribution<double>(-1e6, 1e6)(rng));
    case 5: return CellValue::number(std::ldexp(1.0, std::uniform_int_distribution<int>(-1074, 1023)(rng)));
    default: return CellValue::number(std::uniform_int_distribution<int>(-3, 3)(rng));
  }
}

WorkbookSnapshot random_snapshot(std::mt19937_64& rng, int max_sheets, std::uint32_t dim) {
  std::vector<std::string> names(kSheetNames.begin(), kSheetNames.end());
  std::shuffle(names.begin(), names.end(), rng);
  int count = std::uniform_int_distribution<int>(0, max_sheets)(rng);
  std::vector<Sheet> sheets;
  for (int i = 0; i < count; ++i) {
    Sheet sheet(names[static_cast<std::size_t>(i)]);
    double density = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    for (std::uint32_t r = 1; r <= dim; ++r) {
      for (std::uint32_t c = 1; c <= dim; ++c) {
        if (chance(rng, density)) sheet.put({r, c}, random_cell(rng));
      }
    }
    sheets.push_back(std::move(sheet));
  }
  return WorkbookSnapshot(std::move(sheets));
}

WorkbookSnapshot mutate(std::mt19937_64& rng, const WorkbookSnapshot& base, std::uint32_t dim) {
  if (chance(rng, 0.05)) return base;
  std::vector<Sheet> sheets;
  std::set<std::string> present;
  for (const auto& [name, sheet] : base.sheets()) {
    if (chance(rng, 0.1)) continue;
    Sheet next(name);
    for (const auto& [pos, cell] : sheet->cells()) {
      if (chance(rng, 0.08)) continue;
      if (chance(rng, 0.12)) {
        Cell c(random_value(rng), cell.formula());
        next.put(pos, c.is_blank() ? num(7) : c);
        continue;
      }
      if (chance(rng, 0.06)) {
        auto formula = cell.formula() ? std::optional<std::string>{} : std::optional<std::string>(pick(rng, kFormulas));
        Cell c(cell.value(), formula);
        next.put(pos, c.is_blank() ? num(0) : c);
        continue;
      }
      next.put(pos, cell);
    }
    int inserts = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int i = 0; i < inserts; ++i) {
      GridPos pos{coord(rng, dim), coord(rng, dim)};
      if (!next.find(pos)) next.put(pos, random_cell(rng));
    }
    present.insert(name);
    sheets.push_back(std::move(next));
  }
  if (chance(rng, 0.15)) {
    const auto& name = pick(rng, kSheetNames);
    if (!base.find_sheet(name) && !present.count(name)) {
      Sheet added(name);
      int n = std::uniform_int_distribution<int>(0, 10)(rng);
      for (int i = 0; i < n; ++i) {
        GridPos pos{coord(rng, dim), coord(rng, dim)};
        if (!added.find(pos)) added.put(pos, random_cell(rng));
      }
      sheets.push_back(std::move(added));
    }
  }
  return WorkbookSnapshot(std::move(sheets));
}

ChangeSet brute_force_diff(const WorkbookSnapshot& a, const WorkbookSnapshot& b) {
  std::set<std::string> names;
  for (const auto& [n, _] : a.sheets()) names.insert(n);
  for (const auto& [n, _] : b.sheets()) names.insert(n);

  auto extent = [](const Sheet* s, std::uint32_t& rows, std::uint32_t& cols) {
    if (!s) return;
    for (const auto& [pos, _] : s->cells()) {
      rows = std::max(rows, pos.row);
      cols = std::max(cols, pos.col);
    }
  };

  ChangeSet out;
  for (const auto& name : names) {
    const Sheet* sa = a.find_sheet(name);
    const Sheet* sb = b.find_sheet(name);
    if (!sa) out.push_back({CellAddress::whole_sheet(name), ChangeKind::SheetAdded, std::nullopt, std::nullopt, {}});
    if (!sb) out.push_back({CellAddress::whole_sheet(name), ChangeKind::SheetRemoved, std::nullopt, std::nullopt, {}});
    std::uint32_t rows = 0, cols = 0;
    extent(sa, rows, cols);
    extent(sb, rows, cols);
    for (std::uint32_t r = 1; r <= rows; ++r) {
      for (std::uint32_t c = 1; c <= cols; ++c) {
        const Cell* ca = sa ? sa->find({r, c}) : nullptr;
        const Cell* cb = sb ? sb->find({r, c}) : nullptr;
        CellAddress addr{name, r, c};
        if (!ca && !cb) continue;
        if (!ca) {
          out.push_back({addr, ChangeKind::CellAdded, std::nullopt, *cb, {}});
        } else if (!cb) {
          out.push_back({addr, ChangeKind::CellRemoved, *ca, std::nullopt, {}});
        } else {
          bool value_same = ca->value().type() == cb->value().type() &&
                            (ca->value().is_number() ? ca->value().number_bits() == cb->value().number_bits()
                                                     : ca->value() == cb->value());
          bool formula_same = ca->formula() == cb->formula();
          if (value_same && formula_same) continue;
          ChangeKind kind = !value_same && !formula_same ? ChangeKind::ValueAndFormulaChanged
                            : !value_same                ? ChangeKind::ValueChanged
                                                         : ChangeKind::FormulaChanged;
          out.push_back({addr, kind, *ca, *cb, {}});
        }
      }
    }
  }
  return out;
}

namespace {

std::uint32_t crc32_of(const std::string& data) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char ch : data) crc = table[(crc ^ ch) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

void le16(std::string& out, std::uint32_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}

void le32(std::string& out, std::uint32_t v) {
  le16(out, v & 0xFFFF);
  le16(out, v >> 16);
}

}  // namespace

std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out, central;
  for (const auto& [name, data] : entries) {
    auto offset = static_cast<std::uint32_t>(out.size());
    auto crc = crc32_of(data);
    auto size = static_cast<std::uint32_t>(data.size());
    le32(out, 0x04034b50);
    le16(out, 20);
    le16(out, 0);
    le16(out, 0);  // stored
    le16(out, 0);
    le16(out, 0x21);
    le32(out, crc);
    le32(out, size);
    le32(out, size);
    le16(out, static_cast<std::uint32_t>(name.size()));
    le16(out, 0);
    out += name;
    out += data;

    le32(central, 0x02014b50);
    le16(central, 20);
    le16(central, 20);
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le16(central, 0x21);
    le32(central, crc);
    le32(central, size);
    le32(central, size);
    le16(central, static_cast<std::uint32_t>(name.size()));
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le32(central, 0);
    le32(central, offset);
    central += name;
  }
  auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  le32(out, 0x06054b50);
  le16(out, 0);
  le16(out, 0);
  le16(out, static_cast<std::uint32_t>(entries.size()));
  le16(out, static_cast<std::uint32_t>(entries.size()));
  le32(out, static_cast<std::uint32_t>(central.size()));
  le32(out, cd_offset);
  le16(out, 0);
  return out;
}

namespace {

mpq_class exact(double v) {
  mpq_class q;
  mpq_set_d(q.get_mpq_t(), v);
  return q;
}

double round_to_double(const mpq_class& q) {
  mpfr_t f;
  mpfr_init2(f, 53);
  mpfr_set_q(f, q.get_mpq_t(), MPFR_RNDN);
  double d = mpfr_get_d(f, MPFR_RNDN);
  mpfr_clear(f);
  return d;
}

}  // namespace

double exact_mean(const std::vector<double>& x) {
  mpq_class sum = 0;
  for (double v : x) sum += exact(v);
  return round_to_double(sum / mpq_class(static_cast<long>(x.size())));
}

double exact_covariance(const std::vector<double>& a, const std::vector<double>& b) {
  // Sum over pairs i<j of (a_i-a_j)(b_i-b_j), divided by n(n-1).
  const long n = static_cast<long>(a.size());
  mpq_class sum = 0;
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      sum += (exact(a[static_cast<std::size_t>(i)]) - exact(a[static_cast<std::size_t>(j)])) *
             (exact(b[static_cast<std::size_t>(i)]) - exact(b[static_cast<std::size_t>(j)]));
    }
  }
  return round_to_double(sum / mpq_class(n * (n - 1)));
}

double exact_variance(const std::vector<double>& x) { return exact_covariance(x, x); }

double exact_slope(const std::vector<double>& y) {
  // Sum over pairs i<j of (y_j-y_i)(j-i), divided by the sum of (j-i)^2.
  const long n = static_cast<long>(y.size());
  mpq_class num = 0, den = 0;
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      num += (exact(y[static_cast<std::size_t>(j)]) - exact(y[static_cast<std::size_t>(i)])) * (j - i);
      den += (j - i) * (j - i);
    }
  }
  return round_to_double(num / den);
}

std::filesystem::path cli_binary() { return CELLVAULT_CLI_PATH; }
std::filesystem::path fixtures_dir() { return CELLVAULT_FIXTURES_DIR; }

std::pair<int, std::string> run_command(const std::string& command) {
  std::string output;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

}  // namespace cvtest

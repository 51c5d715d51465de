#include "zsl/dataset_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include "zsl/error.hpp"

namespace zsl {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

Error parse_error(const std::string& source, std::size_t line, const std::string& what) {
  return Error(ErrorKind::Parse, source + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void put_double(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

// Header `key=value key=value ...` after an optional leading tag.
std::map<std::string, std::string> parse_header(std::string_view line, const std::string& source,
                                                std::string_view tag = {}) {
  auto fields = split_whitespace(line);
  std::size_t first = 0;
  if (!tag.empty()) {
    if (fields.empty() || fields[0] != tag) throw parse_error(source, 1, "expected header starting with '" + std::string(tag) + "'");
    first = 1;
  }
  std::map<std::string, std::string> kv;
  for (std::size_t i = first; i < fields.size(); ++i) {
    const auto eq = fields[i].find('=');
    if (eq == std::string_view::npos) throw parse_error(source, 1, "bad header field '" + std::string(fields[i]) + "'");
    kv.emplace(std::string(fields[i].substr(0, eq)), std::string(fields[i].substr(eq + 1)));
  }
  return kv;
}

const std::string& header_field(const std::map<std::string, std::string>& kv, const std::string& key,
                                const std::string& source) {
  auto it = kv.find(key);
  if (it == kv.end()) throw parse_error(source, 1, "header is missing '" + key + "='");
  return it->second;
}

std::size_t header_size(const std::map<std::string, std::string>& kv, const std::string& key,
                        const std::string& source) {
  std::size_t v = 0;
  if (!parse_int(header_field(kv, key, source), v)) throw parse_error(source, 1, "bad value for '" + key + "'");
  return v;
}

// Lines with comments and blanks skipped; yields (line number, content).
template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    f(number, std::string_view(line));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

FeatureSet read_features(std::istream& in, bool l2_normalize, const std::string& source) {
  std::string header;
  if (!std::getline(in, header)) throw parse_error(source, 1, "missing header");
  const auto kv = parse_header(header, source);
  const std::size_t d = header_size(kv, "d", source);
  const std::size_t n = header_size(kv, "n", source);
  const std::string& flag = header_field(kv, "normalized", source);
  if (flag != "0" && flag != "1") throw parse_error(source, 1, "normalized must be 0 or 1");
  if (d == 0) throw parse_error(source, 1, "d must be positive");

  FeatureSet out;
  out.normalized = flag == "1" || l2_normalize;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.ids.reserve(n);
  std::unordered_set<std::string> ids;

  std::string line;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (out.ids.size() == n) throw parse_error(source, number, "more rows than the declared n=" + std::to_string(n));
    if (fields.size() != d + 1)
      throw parse_error(source, number, "expected id and " + std::to_string(d) + " values, found " +
                                            std::to_string(fields.size()) + " fields");
    std::string id(fields[0]);
    if (!ids.insert(id).second) throw parse_error(source, number, "duplicate id '" + id + "'");
    const auto row = static_cast<Eigen::Index>(out.ids.size());
    for (std::size_t j = 0; j < d; ++j) {
      double v;
      if (!parse_double(fields[j + 1], v) || !std::isfinite(v))
        throw parse_error(source, number, "bad number '" + std::string(fields[j + 1]) + "'");
      out.values(row, static_cast<Eigen::Index>(j)) = v;
    }
    if (l2_normalize) {
      const double norm = out.values.row(row).norm();
      if (!(norm > 0.0))
        throw Error(ErrorKind::DegenerateFeature, source + ":" + std::to_string(number) + ": instance '" + id +
                                                      "' is a zero vector and cannot be normalized");
      out.values.row(row) /= norm;
    }
    out.ids.push_back(std::move(id));
  }
  if (out.ids.size() != n)
    throw parse_error(source, number, "declared n=" + std::to_string(n) + " but found " + std::to_string(out.ids.size()) + " rows");
  return out;
}

FeatureSet load_features(const std::filesystem::path& path, bool l2_normalize) {
  auto in = open_in(path);
  return read_features(in, l2_normalize, path.string());
}

void write_features(std::ostream& out, const FeatureSet& features) {
  out << "d=" << features.values.cols() << " n=" << features.values.rows()
      << " normalized=" << (features.normalized ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < features.ids.size(); ++i) {
    out << features.ids[i];
    for (Eigen::Index j = 0; j < features.values.cols(); ++j) {
      out << ' ';
      put_double(out, features.values(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
}

void save_features(const std::filesystem::path& path, const FeatureSet& features) {
  auto out = open_out(path);
  write_features(out, features);
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> read_pairs(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  for_each_line(in, [&](std::size_t number, std::string_view line) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw parse_error(source, number, "expected two tab-separated columns");
    const auto key = trim(line.substr(0, tab));
    const auto value = trim(line.substr(tab + 1));
    if (key.empty() || value.empty() || value.find('\t') != std::string_view::npos)
      throw parse_error(source, number, "expected two non-empty tab-separated columns");
    out.emplace_back(std::string(key), std::string(value));
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> load_pairs(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pairs(in, path.string());
}

void write_pairs(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& pairs) {
  for (const auto& [k, v] : pairs) out << k << '\t' << v << '\n';
}

std::map<std::string, std::string> load_mapping(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for (auto& [k, v] : load_pairs(path)) {
    if (!out.emplace(k, v).second) throw Error(ErrorKind::Parse, path.string() + ": duplicate key '" + k + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------

ClassSplits read_splits(std::istream& in, const std::string& source) {
  ClassSplits splits;
  std::vector<std::string>* current = nullptr;
  std::set<std::string> sections;
  for_each_line(in, [&](std::size_t number, std::string_view raw) {
    const auto line = trim(raw);
    if (line.front() == '[') {
      if (line.back() != ']') throw parse_error(source, number, "unterminated section header");
      const std::string name(line.substr(1, line.size() - 2));
      if (!sections.insert(name).second) throw parse_error(source, number, "section [" + name + "] repeated");
      if (name == "seen") current = &splits.seen;
      else if (name == "zsl_validation") current = &splits.zsl_validation;
      else if (name == "zsl_test") current = &splits.zsl_test;
      else throw parse_error(source, number, "unknown section [" + name + "]");
      return;
    }
    if (!current) throw parse_error(source, number, "class listed before any section header");
    current->emplace_back(line);
  });
  return splits;
}

ClassSplits load_splits(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_splits(in, path.string());
}

void write_splits(std::ostream& out, const ClassSplits& splits) {
  for (Split s : {Split::Seen, Split::ZslValidation, Split::ZslTest}) {
    out << '[' << to_string(s) << "]\n";
    for (const auto& c : splits.classes(s)) out << c << '\n';
  }
}

SplitDataset make_dataset(const FeatureSet& features, const std::vector<std::pair<std::string, std::string>>& labels,
                          const ClassSplits& splits) {
  std::unordered_map<std::string, std::string> by_id;
  for (const auto& [id, label] : labels) {
    if (!by_id.emplace(id, label).second) throw Error(ErrorKind::Parse, "instance '" + id + "' labelled twice");
  }
  std::vector<std::string> aligned;
  aligned.reserve(features.ids.size());
  for (const auto& id : features.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::IncompleteCoverage, "instance '" + id + "' has no label");
    aligned.push_back(it->second);
  }
  return SplitDataset(features.ids, features.values, std::move(aligned), splits, features.normalized);
}

// ---------------------------------------------------------------------------

AttributeSchema read_attribute_schema(std::istream& in, const std::string& source) {
  std::vector<Attribute> attributes;
  for (const auto& [name, values] : read_pairs(in, source)) {
    Attribute a{name, {}};
    for (auto v : split_on(values, '|')) a.values.emplace_back(trim(v));
    attributes.push_back(std::move(a));
  }
  return AttributeSchema(std::move(attributes));
}

std::map<std::string, AttributeAssignment> read_attribute_assignments(std::istream& in, const std::string& source) {
  std::map<std::string, AttributeAssignment> out;
  for_each_line(in, [&](std::size_t number, std::string_view line) {
    const auto fields = split_on(line, '\t');
    const std::string cls(trim(fields[0]));
    if (cls.empty()) throw parse_error(source, number, "missing class name");
    AttributeAssignment a{cls, {}};
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto field = trim(fields[i]);
      if (field.empty()) continue;
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) throw parse_error(source, number, "expected attribute=value[|value...]");
      auto& chosen = a.chosen[std::string(trim(field.substr(0, eq)))];
      for (auto v : split_on(field.substr(eq + 1), '|')) {
        const auto value = trim(v);
        if (!value.empty()) chosen.emplace(value);
      }
    }
    if (!out.emplace(cls, std::move(a)).second) throw parse_error(source, number, "class '" + cls + "' repeated");
  });
  return out;
}

AttributeSchema load_attribute_schema(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_attribute_schema(in, path.string());
}

std::map<std::string, AttributeAssignment> load_attribute_assignments(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_attribute_assignments(in, path.string());
}

TaxonomyTree load_taxonomy(const std::filesystem::path& path) {
  const auto edges = load_pairs(path);
  return TaxonomyTree::from_edges(edges);
}

// ---------------------------------------------------------------------------

WordVectorTable read_word_vectors(std::istream& in, const std::string& source) {
  std::optional<WordVectorTable> table;
  bool first = true;
  for_each_line(in, [&](std::size_t number, std::string_view line) {
    const auto fields = split_whitespace(line);
    if (first) {
      first = false;
      std::size_t count = 0, dim = 0;
      if (fields.size() == 2 && parse_int(fields[0], count) && parse_int(fields[1], dim)) {
        table.emplace(dim);
        return;
      }
    }
    if (fields.size() < 2) throw parse_error(source, number, "expected token and at least one value");
    if (!table) table.emplace(fields.size() - 1);
    if (fields.size() - 1 != table->dimension())
      throw parse_error(source, number, "expected " + std::to_string(table->dimension()) + " values");
    Vector v(static_cast<Eigen::Index>(fields.size() - 1));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      if (!parse_double(fields[j], v[static_cast<Eigen::Index>(j - 1)]))
        throw parse_error(source, number, "bad number '" + std::string(fields[j]) + "'");
    }
    table->add(std::string(fields[0]), std::move(v));
  });
  if (!table) throw Error(ErrorKind::Parse, source + ": no word vectors");
  return std::move(*table);
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_word_vectors(in, path.string());
}

// ---------------------------------------------------------------------------

std::vector<ClassEmbedding> read_class_embeddings(std::istream& in, const std::string& source) {
  std::string header;
  if (!std::getline(in, header)) throw parse_error(source, 1, "missing header");
  const auto kv = parse_header(header, source, "zsl-class-embeddings");
  const std::size_t m = header_size(kv, "m", source);
  const std::size_t n = header_size(kv, "n", source);
  auto layout_it = kv.find("layout");
  const BlockLayout layout = parse_layout(layout_it == kv.end() ? std::string_view{} : std::string_view(layout_it->second));
  std::size_t covered = 0;
  for (const auto& b : layout) covered += b.length;
  if (!layout.empty() && covered != m) throw parse_error(source, 1, "layout does not cover m=" + std::to_string(m));

  std::vector<ClassEmbedding> out;
  std::string line;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw parse_error(source, number, "expected class<TAB>values");
    const auto values = split_whitespace(std::string_view(line).substr(tab + 1));
    if (values.size() != m) throw parse_error(source, number, "expected " + std::to_string(m) + " values");
    ClassEmbedding e{line.substr(0, tab), Vector(static_cast<Eigen::Index>(m)), layout};
    for (std::size_t j = 0; j < m; ++j) {
      if (!parse_double(values[j], e.vector[static_cast<Eigen::Index>(j)]))
        throw parse_error(source, number, "bad number '" + std::string(values[j]) + "'");
    }
    out.push_back(std::move(e));
  }
  if (out.size() != n) throw parse_error(source, number, "declared n=" + std::to_string(n) + " classes, found " + std::to_string(out.size()));
  return out;
}

std::vector<ClassEmbedding> load_class_embeddings(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_class_embeddings(in, path.string());
}

void write_class_embeddings(std::ostream& out, const std::vector<ClassEmbedding>& embeddings) {
  const std::size_t m = embeddings.empty() ? 0 : static_cast<std::size_t>(embeddings.front().vector.size());
  out << "zsl-class-embeddings m=" << m << " n=" << embeddings.size()
      << " layout=" << (embeddings.empty() ? std::string() : format_layout(embeddings.front().layout)) << '\n';
  for (const auto& e : embeddings) {
    out << e.class_name << '\t';
    for (Eigen::Index j = 0; j < e.vector.size(); ++j) {
      if (j) out << ' ';
      put_double(out, e.vector[j]);
    }
    out << '\n';
  }
}

void save_class_embeddings(const std::filesystem::path& path, const std::vector<ClassEmbedding>& embeddings) {
  auto out = open_out(path);
  write_class_embeddings(out, embeddings);
}

// ---------------------------------------------------------------------------
// Checkpoint layout (little-endian):
//   "ZSLCKPT1"  u64 d  u64 m  u64 class_count  {u64 len, bytes}*
//   u64 block_count  {u8 source, u64 offset, u64 length}*
//   f64[(d+1)*(m+1)] W_e row-major
//   u8 has_adam  [u64 step, f64 beta1, beta2, alpha, epsilon, f64[] M, f64[] V]

namespace {

constexpr char kMagic[8] = {'Z', 'S', 'L', 'C', 'K', 'P', 'T', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void u64(std::uint64_t v) { pod(v); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void matrix(const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) pod(m(r, c));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, const std::string& source) : in_(in), source_(source) {}
  template <typename T>
  T pod() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw Error(ErrorKind::Parse, source_ + ": truncated checkpoint");
    return v;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::string str() {
    const auto n = u64();
    if (n > (1u << 20)) throw Error(ErrorKind::Parse, source_ + ": implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) throw Error(ErrorKind::Parse, source_ + ": truncated checkpoint");
    return s;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = pod<double>();
    return m;
  }

 private:
  std::istream& in_;
  const std::string& source_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u64(checkpoint.model.image_dim());
  w.u64(checkpoint.model.class_dim());
  w.u64(checkpoint.classes.size());
  for (const auto& c : checkpoint.classes) w.str(c);
  w.u64(checkpoint.layout.size());
  for (const auto& b : checkpoint.layout) {
    w.pod(static_cast<std::uint8_t>(b.source));
    w.u64(b.offset);
    w.u64(b.length);
  }
  w.matrix(checkpoint.model.extended());
  w.pod(static_cast<std::uint8_t>(checkpoint.optimizer ? 1 : 0));
  if (checkpoint.optimizer) {
    const AdamState& s = *checkpoint.optimizer;
    w.u64(s.step);
    w.pod(s.beta1);
    w.pod(s.beta2);
    w.pod(s.alpha);
    w.pod(s.epsilon);
    w.matrix(s.first_moment);
    w.matrix(s.second_moment);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::Parse, source + ": not a model checkpoint");
  Reader r(in, source);
  const auto d = r.u64();
  const auto m = r.u64();
  if (d == 0 || m == 0 || d > (1u << 24) || m > (1u << 24)) throw Error(ErrorKind::Parse, source + ": bad dimensions");
  Checkpoint cp;
  const auto classes = r.u64();
  if (classes > (1u << 24)) throw Error(ErrorKind::Parse, source + ": implausible class count");
  for (std::uint64_t i = 0; i < classes; ++i) cp.classes.push_back(r.str());
  const auto blocks = r.u64();
  if (blocks > 3) throw Error(ErrorKind::Parse, source + ": bad block layout");
  for (std::uint64_t i = 0; i < blocks; ++i) {
    const auto src = r.pod<std::uint8_t>();
    if (src > 2) throw Error(ErrorKind::Parse, source + ": bad block source");
    const auto offset = r.u64();
    const auto length = r.u64();
    cp.layout.push_back({static_cast<EmbeddingSource>(src), offset, length});
  }
  const auto rows = static_cast<Eigen::Index>(d + 1);
  const auto cols = static_cast<Eigen::Index>(m + 1);
  cp.model = CompatModel(r.matrix(rows, cols));
  if (r.pod<std::uint8_t>()) {
    AdamState s;
    s.step = r.u64();
    s.beta1 = r.pod<double>();
    s.beta2 = r.pod<double>();
    s.alpha = r.pod<double>();
    s.epsilon = r.pod<double>();
    s.first_moment = r.matrix(rows, cols);
    s.second_moment = r.matrix(rows, cols);
    cp.optimizer = std::move(s);
  }
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  auto out = open_out(path, std::ios::binary);
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  return read_checkpoint(in, path.string());
}

}  // namespace zsl

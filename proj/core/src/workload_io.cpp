// Copyright 2025 The mipu-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mipu/workload_io.hpp"

#include <bit>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <variant>

#include "mipu/errors.hpp"

namespace mipu::io {
namespace {

// ---- tiny TOML-subset scanner -------------------------------------------

struct Value {
  std::variant<double, bool, std::string, std::vector<Value>> v;

  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_array() const { return std::holds_alternative<std::vector<Value>>(v); }
  double num() const { return std::get<double>(v); }
  const std::vector<Value>& arr() const { return std::get<std::vector<Value>>(v); }
};

class Parser {
 public:
  Parser(std::string_view text) : text_(text) {}

  // section -> (key -> value); keys before any section land in "".
  std::map<std::string, std::map<std::string, Value>> parse() {
    std::map<std::string, std::map<std::string, Value>> out;
    std::string section;
    while (skip_blank(), !eof()) {
      if (peek() == '[') {
        get();
        section = ident();
        skip_spaces();
        expect(']');
        continue;
      }
      std::string key = ident();
      skip_spaces();
      expect('=');
      skip_spaces();
      out[section][key] = value();
    }
    return out;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() { return text_[pos_++]; }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_blank() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (eof() || get() != c) {
      throw ParseError(line_, std::string("expected '") + c + "'");
    }
  }

  std::string ident() {
    std::string s;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_')) {
      s += get();
    }
    if (s.empty()) throw ParseError(line_, "expected identifier");
    return s;
  }

  Value value() {
    skip_blank();
    if (eof()) throw ParseError(line_, "expected value");
    char c = peek();
    if (c == '[') {
      get();
      std::vector<Value> items;
      skip_blank();
      if (!eof() && peek() == ']') {
        get();
        return Value{items};
      }
      while (true) {
        items.push_back(value());
        skip_blank();
        if (!eof() && peek() == ',') {
          get();
          skip_blank();
          if (!eof() && peek() == ']') break;  // trailing comma
          continue;
        }
        break;
      }
      skip_blank();
      expect(']');
      return Value{std::move(items)};
    }
    if (c == '"') {
      get();
      std::string s;
      while (!eof() && peek() != '"') s += get();
      expect('"');
      return Value{s};
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string word = ident();
      if (word == "true") return Value{true};
      if (word == "false") return Value{false};
      return Value{word};  // bare word, treated as string (e.g. mode names)
    }
    // number
    std::string num;
    while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) ||
                      peek() == '+' || peek() == '-' || peek() == '.' ||
                      peek() == 'e' || peek() == 'E' || peek() == 'x' ||
                      std::isxdigit(static_cast<unsigned char>(peek())))) {
      num += get();
    }
    if (num.empty()) throw ParseError(line_, "expected value");
    char* end = nullptr;
    const double d = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size()) {
      throw ParseError(line_, "bad number '" + num + "'");
    }
    return Value{d};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

// ---- helpers over the parsed table ---------------------------------------

using Table = std::map<std::string, Value>;

const Value* find(const Table& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

std::size_t get_size(const Table& t, const std::string& key,
                     std::size_t fallback) {
  const Value* v = find(t, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(key + " must be a number");
  return static_cast<std::size_t>(v->num());
}

double get_double(const Table& t, const std::string& key, double fallback) {
  const Value* v = find(t, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(key + " must be a number");
  return v->num();
}

bool get_bool(const Table& t, const std::string& key, bool fallback) {
  const Value* v = find(t, key);
  if (!v) return fallback;
  if (!v->is_bool()) throw ConfigError(key + " must be true/false");
  return std::get<bool>(v->v);
}

void flatten(const Value& v, std::vector<float>& out,
             std::vector<std::size_t>& dims, std::size_t depth) {
  if (!v.is_array()) {
    if (!v.is_number()) throw ConfigError("tensor literal must be numeric");
    out.push_back(static_cast<float>(v.num()));
    return;
  }
  const auto& items = v.arr();
  if (dims.size() <= depth) {
    dims.push_back(items.size());
  } else if (dims[depth] != items.size()) {
    throw ConfigError("ragged tensor literal");
  }
  for (const auto& item : items) flatten(item, out, dims, depth + 1);
}

oracle::Tensor tensor_from_value(const Value& v) {
  std::vector<float> data;
  std::vector<std::size_t> dims;
  flatten(v, data, dims, 0);
  if (dims.empty()) throw ConfigError("tensor literal must be an array");
  oracle::Tensor t(dims);
  t.data = std::move(data);
  return t;
}

std::string join_dir(const std::string& dir, const std::string& path) {
  if (dir.empty() || path.empty() || path[0] == '/') return path;
  return dir + "/" + path;
}

// Loads a tensor from `key` (inline literal) or `key_blob` (+ given dims);
// falls back to a seeded fill of `dims`.
oracle::Tensor tensor_field(const Table& t, const std::string& key,
                            const std::vector<std::size_t>& dims,
                            std::uint64_t seed, const std::string& dir) {
  if (const Value* v = find(t, key)) {
    oracle::Tensor tensor = tensor_from_value(*v);
    std::size_t want = 1;
    for (auto d : dims) want *= d;
    if (tensor.size() != want) {
      throw ConfigError(key + " has " + std::to_string(tensor.size()) +
                        " values, expected " + std::to_string(want));
    }
    tensor.dims = dims;
    return tensor;
  }
  if (const Value* v = find(t, key + "_blob")) {
    if (!v->is_string()) throw ConfigError(key + "_blob must be a path");
    return load_f32_blob(join_dir(dir, std::get<std::string>(v->v)), dims);
  }
  oracle::Tensor tensor(dims);
  fill_random(tensor.data, seed);
  return tensor;
}

}  // namespace

void fill_random(std::vector<float>& values, std::uint64_t seed) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed ^ (seed >> 32)));
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (auto& v : values) v = dist(rng);
}

oracle::Tensor load_f32_blob(const std::string& path,
                             const std::vector<std::size_t>& dims) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  oracle::Tensor t(dims);
  for (auto& v : t.data) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) {
      int c = is.get();
      if (c == EOF) throw IoError(path + " is shorter than the given dims");
      bits |= static_cast<std::uint32_t>(c & 0xFF) << (8 * i);
    }
    v = std::bit_cast<float>(bits);
  }
  return t;
}

void save_f32_blob(const std::string& path, const oracle::Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (float v : t.data) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
      os.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
  }
}

FabricConfig parse_fabric_config(const std::string& text) {
  auto sections = Parser(text).parse();
  if (sections.size() > 1 ||
      (sections.size() == 1 && !sections.count(""))) {
    // allow an optional [fabric] section header
    if (sections.size() != 1 || !sections.count("fabric")) {
      throw ConfigError("fabric config must be flat key = value text");
    }
  }
  const Table& t = sections.count("fabric") ? sections["fabric"]
                                            : sections[""];
  FabricConfig cfg;
  for (const auto& [key, value] : t) {
    if (key == "sitems") cfg.sitems = static_cast<std::uint32_t>(value.num());
    else if (key == "sitem_cols") cfg.sitem_cols = static_cast<std::uint32_t>(value.num());
    else if (key == "fifo_depth") cfg.fifo_depth = static_cast<std::uint32_t>(value.num());
    else if (key == "buses_per_row") cfg.buses_per_row = static_cast<std::uint32_t>(value.num());
    else if (key == "buses_per_col") cfg.buses_per_col = static_cast<std::uint32_t>(value.num());
    else if (key == "sitem_egress_width") cfg.sitem_egress_width = static_cast<std::uint32_t>(value.num());
    else if (key == "clock_hz") cfg.clock_hz = value.num();
    else throw ConfigError("unknown fabric key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

FabricConfig load_fabric_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_fabric_config(ss.str());
}

namespace {

Workload parse_tables(std::map<std::string, Table>& sections,
                      const std::string& dir) {
  Workload w;
  if (sections.count("matmul")) {
    const Table& t = sections["matmul"];
    w.kind = Workload::Kind::MatMul;
    auto& spec = w.matmul;
    spec.n = get_size(t, "n", 1);
    spec.m = get_size(t, "m", 1);
    spec.p = get_size(t, "p", 1);
    const std::uint64_t seed = get_size(t, "seed", 1);
    if (const Value* v = find(t, "mode")) {
      const std::string mode = std::get<std::string>(v->v);
      if (mode == "sequential") spec.mode = compiler::MatMulSpec::Mode::Sequential;
      else if (mode == "parallel") spec.mode = compiler::MatMulSpec::Mode::Parallel;
      else throw ConfigError("mode must be sequential or parallel");
    }
    spec.a = tensor_field(t, "a", {spec.n, spec.m}, seed * 2 + 1, dir).data;
    spec.b = tensor_field(t, "b", {spec.m, spec.p}, seed * 2 + 2, dir).data;
    return w;
  }

  const bool is_cnn = sections.count("cnn") > 0;
  if (!is_cnn && !sections.count("conv")) {
    throw ConfigError("workload file needs a [matmul], [conv] or [cnn] section");
  }
  const Table& t = is_cnn ? sections["cnn"] : sections["conv"];
  const std::size_t h = get_size(t, "image_h", 5);
  const std::size_t wdt = get_size(t, "image_w", h);
  const std::size_t channels = get_size(t, "channels", 1);
  const std::size_t filters = get_size(t, "filters", 1);
  const std::size_t kernel = get_size(t, "kernel", 3);
  const std::uint64_t seed = get_size(t, "seed", 1);

  compiler::ConvSpec conv;
  conv.stride = get_size(t, "stride", 1);
  conv.pad = get_size(t, "pad", 0);
  const std::vector<std::size_t> image_dims =
      channels > 1 ? std::vector<std::size_t>{h, wdt, channels}
                   : std::vector<std::size_t>{h, wdt};
  const std::vector<std::size_t> filter_dims =
      channels > 1 ? std::vector<std::size_t>{filters, kernel, kernel, channels}
                   : std::vector<std::size_t>{filters, kernel, kernel};
  conv.image = tensor_field(t, "image", image_dims, seed * 2 + 1, dir);
  conv.filters = tensor_field(t, "filter_values", filter_dims, seed * 2 + 2, dir);

  if (!is_cnn) {
    w.kind = Workload::Kind::Conv;
    w.conv = std::move(conv);
    return w;
  }

  w.kind = Workload::Kind::Cnn;
  auto& cnn = w.cnn;
  cnn.conv = std::move(conv);
  cnn.relu = get_bool(t, "relu", true);
  cnn.pool = get_bool(t, "pool", true);
  cnn.pool_stride = get_size(t, "pool_stride", 1);
  cnn.clock_hz = get_double(t, "clock_hz", 1e8);
  const std::size_t batch = get_size(t, "batch", 1);
  for (std::size_t q = 1; q < batch; ++q) {
    oracle::Tensor img(image_dims);
    fill_random(img.data, seed * 1000 + q);
    cnn.extra_images.push_back(std::move(img));
  }
  if (const Value* v = find(t, "fc")) {
    if (!v->is_array()) throw ConfigError("fc must be an array of sizes");
    std::size_t in_n = 0;
    {
      // fabric-stage output size feeds the first FC layer
      const std::size_t oh = (h + 2 * cnn.conv.pad - kernel) / cnn.conv.stride + 1;
      const std::size_t ow = (wdt + 2 * cnn.conv.pad - kernel) / cnn.conv.stride + 1;
      const std::size_t ph = cnn.pool ? (oh - 2) / cnn.pool_stride + 1 : oh;
      const std::size_t pw = cnn.pool ? (ow - 2) / cnn.pool_stride + 1 : ow;
      in_n = ph * pw * filters;
    }
    std::size_t layer = 0;
    for (const auto& item : v->arr()) {
      if (!item.is_number()) throw ConfigError("fc sizes must be numbers");
      const auto out_n = static_cast<std::size_t>(item.num());
      oracle::Tensor wts({out_n, in_n});
      fill_random(wts.data, seed * 77 + 13 * (++layer));
      cnn.fc_weights.push_back(std::move(wts));
      in_n = out_n;
    }
  }
  return w;
}

}  // namespace

Workload parse_workload(const std::string& text, const std::string& dir) {
  auto sections = Parser(text).parse();
  return parse_tables(sections, dir);
}

Workload load_workload(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::string dir;
  if (auto slash = path.find_last_of('/'); slash != std::string::npos) {
    dir = path.substr(0, slash);
  }
  return parse_workload(ss.str(), dir);
}

compiler::CompiledWorkload Workload::compile(std::size_t max_sitems) const {
  switch (kind) {
    case Kind::MatMul: return compiler::compile_matmul(matmul, max_sitems);
    case Kind::Conv: return compiler::compile_conv(conv, 1e8, max_sitems);
    case Kind::Cnn: return compiler::compile_cnn(cnn, max_sitems);
  }
  throw Error("bad workload kind");
}

std::vector<float> Workload::expected() const {
  switch (kind) {
    case Kind::MatMul: return compiler::expected_results(matmul);
    case Kind::Conv: return compiler::expected_results(conv);
    case Kind::Cnn: return compiler::expected_results(cnn);
  }
  throw Error("bad workload kind");
}

std::string Workload::kind_name() const {
  switch (kind) {
    case Kind::MatMul: return "matmul";
    case Kind::Conv: return "conv";
    case Kind::Cnn: return "cnn";
  }
  return "?";
}

}  // namespace mipu::io

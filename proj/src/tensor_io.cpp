// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "mxemu/error.hpp"

namespace mxemu {

namespace {

constexpr char kTensorMagic[4] = {'M', 'X', 'T', '1'};
constexpr char kQuantMagic[4] = {'M', 'X', 'Q', '1'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    uint(static_cast<std::uint16_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > b_.size() - pos_) throw DataError("truncated file");
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U uint() {
    const auto s = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(s[i]) << (8 * i));
    }
    return v;
  }
  std::uint8_t u8() { return take(1)[0]; }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    const auto n = uint<std::uint16_t>();
    const auto s = take(n);
    return std::string(s.begin(), s.end());
  }
  bool done() const { return pos_ == b_.size(); }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, const char (&magic)[4], const char* what) {
  const auto m = r.take(4);
  if (!std::equal(m.begin(), m.end(), magic)) {
    throw DataError(std::string("bad magic: not an ") + what + " file");
  }
}

Shape read_dims(Reader& r) {
  const std::uint8_t ndim = r.u8();
  if (ndim == 0) throw DataError("tensor file has zero dimensions");
  Shape shape(ndim);
  std::size_t total = 1;
  for (auto& d : shape) {
    d = static_cast<std::size_t>(r.uint<std::uint64_t>());
    if (d == 0) throw DataError("tensor file has a zero-length dimension");
    if (total > std::numeric_limits<std::size_t>::max() / 8 / d) {
      throw DataError("tensor file dimensions are too large");
    }
    total *= d;
  }
  return shape;
}

void write_dims(Writer& w, const Shape& shape) {
  if (shape.empty() || shape.size() > 255) {
    throw ShapeError("cannot store a tensor of rank " +
                     std::to_string(shape.size()));
  }
  w.u8(static_cast<std::uint8_t>(shape.size()));
  for (auto d : shape) w.uint(static_cast<std::uint64_t>(d));
}

}  // namespace

std::vector<std::uint8_t> encode_tensor_file(const Tensor& t, DType dtype) {
  Writer w;
  w.raw(kTensorMagic, 4);
  w.u8(static_cast<std::uint8_t>(dtype));
  write_dims(w, t.shape);
  for (double v : t.data) {
    if (dtype == DType::kFloat32) {
      w.f32(static_cast<float>(v));
    } else {
      w.f64(v);
    }
  }
  return w.take();
}

TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, kTensorMagic, "MXT1");
  const std::uint8_t dt = r.u8();
  if (dt > 1) throw DataError("unsupported dtype " + std::to_string(dt));
  TensorFile f;
  f.dtype = static_cast<DType>(dt);
  Shape shape = read_dims(r);
  const std::size_t n = element_count(shape);
  const std::size_t width = f.dtype == DType::kFloat32 ? 4 : 8;
  if (r.remaining() / width < n || r.remaining() != n * width) {
    throw DataError("payload holds " + std::to_string(r.remaining()) +
                    " bytes, expected " + std::to_string(n * width));
  }
  std::vector<double> data(n);
  for (auto& v : data) {
    v = f.dtype == DType::kFloat32 ? static_cast<double>(r.f32()) : r.f64();
  }
  f.tensor = Tensor(std::move(shape), std::move(data));
  return f;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return bytes;
}

void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  return decode_tensor_file(read_bytes(path));
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t,
                       DType dtype) {
  write_bytes(path, encode_tensor_file(t, dtype));
}

Tensor parse_csv(std::string_view text) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t n = 0;
    while (true) {
      const std::size_t comma = line.find(',');
      std::string_view cell = line.substr(0, comma);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
        cell.remove_prefix(1);
      }
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) {
        cell.remove_suffix(1);
      }
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError("CSV line " + std::to_string(line_no) +
                        ": cannot parse '" + std::string(cell) + "'");
      }
      data.push_back(v);
      ++n;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = n;
    } else if (n != cols) {
      throw DataError("CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(n) + " values, expected " +
                      std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("CSV input is empty");
  return Tensor({rows, cols}, std::move(data));
}

TensorFile load_tensor(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    const auto bytes = read_bytes(path);
    return {DType::kFloat64,
            parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                       bytes.size()))};
  }
  return read_tensor_file(path);
}

std::vector<std::uint8_t> encode_quantized(const QuantizedTensor& q) {
  const QuantConfig& cfg = q.config;
  if (cfg.format.kind() == FormatKind::kCodebook || cfg.format.total_bits() > 8) {
    throw ConfigError("MXQ1 stores only named formats of at most 8 bits");
  }
  Writer w;
  w.raw(kQuantMagic, 4);
  w.u8(1);
  w.str(format_name(cfg.format, cfg.asymmetric));
  w.str(cfg.scale_mode.name());
  w.str(cfg.group_size.to_string());
  w.uint(static_cast<std::uint32_t>(static_cast<std::int32_t>(cfg.axis)));
  write_dims(w, q.shape);
  w.u8(q.tensor_scale ? 1 : 0);
  w.f64(q.tensor_scale.value_or(0.0));
  w.uint(static_cast<std::uint64_t>(q.scales.size()));
  const bool zp = cfg.uses_zero_point();
  for (const auto& s : q.scales) {
    w.f64(s.pos_scale);
    w.f64(s.neg_scale);
    w.uint(scale_bits(s.pos_scale, cfg.scale_mode));
    w.uint(zp ? static_cast<std::uint32_t>(s.neg_scale)
              : scale_bits(s.neg_scale, cfg.scale_mode));
  }
  for (const auto& c : q.codes) {
    w.u8(static_cast<std::uint8_t>(zp ? c.code : code_bits(c, cfg.format)));
  }
  return w.take();
}

QuantizedTensor decode_quantized(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, kQuantMagic, "MXQ1");
  if (r.u8() != 1) throw DataError("unsupported MXQ1 version");
  QuantizedTensor q;
  const FormatSpec fs = parse_format_name(r.str());
  q.config.format = fs.format;
  q.config.asymmetric = fs.asymmetric;
  q.config.scale_mode = ScaleMode::from_name(r.str());
  q.config.group_size = GroupSize::parse(r.str());
  q.config.axis = static_cast<std::int32_t>(r.uint<std::uint32_t>());
  q.shape = read_dims(r);
  const bool has_ts = r.u8() != 0;
  const double ts = r.f64();
  if (has_ts) q.tensor_scale = ts;
  const auto groups = r.uint<std::uint64_t>();
  const GroupLayout layout = q.layout();
  if (groups != layout.group_count()) {
    throw DataError("MXQ1 group count does not match its shape");
  }
  q.scales.resize(groups);
  for (auto& s : q.scales) {
    s.pos_scale = r.f64();
    s.neg_scale = r.f64();
    r.uint<std::uint32_t>();
    r.uint<std::uint32_t>();
  }
  const ElementFormat& fmt = q.config.format;
  const bool zp = q.config.uses_zero_point();
  const auto raw = fmt.raw_bits();
  const int mag_bits = fmt.total_bits() - 1;
  const std::size_t n = element_count(q.shape);
  if (r.remaining() != n) throw DataError("MXQ1 code payload size mismatch");
  q.codes.resize(n);
  for (auto& c : q.codes) {
    const std::uint8_t b = r.u8();
    if (zp) {
      c = ElementCode{0, b};
      continue;
    }
    const std::uint32_t mag = b & ((1u << mag_bits) - 1);
    const auto it = std::find(raw.begin(), raw.end(), mag);
    if (it == raw.end() || (b >> fmt.total_bits()) != 0) {
      throw DataError("invalid code byte " + std::to_string(b));
    }
    c = ElementCode{static_cast<std::uint8_t>((b >> mag_bits) & 1u),
                    static_cast<std::uint32_t>(it - raw.begin())};
  }
  return q;
}

}  // namespace mxemu

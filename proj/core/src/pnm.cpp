#include "sentinel/pnm.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "sentinel/error.hpp"

namespace sentinel {

PnmError::PnmError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

namespace {

bool is_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_positive(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) {
      throw PnmError(PnmError::Kind::MalformedHeader, pos_,
                     std::string("unexpected end of header reading ") + field);
    }
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<int>::max()) {
        throw PnmError(PnmError::Kind::MalformedHeader, start,
                       std::string("value too large for ") + field);
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw PnmError(PnmError::Kind::MalformedHeader, start,
                     std::string("expected decimal ") + field);
    }
    if (pos_ < bytes_.size() && !is_space(bytes_[pos_])) {
      throw PnmError(PnmError::Kind::MalformedHeader, pos_,
                     std::string("expected whitespace after ") + field);
    }
    return value;
  }

  [[nodiscard]] std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

PnmFrame decode_pnm_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw PnmError(PnmError::Kind::MalformedHeader, 0, "missing P5/P6 magic number");
  }
  const bool color = bytes[1] == '6';
  HeaderReader reader(bytes);
  reader.advance(2);
  if (bytes.size() > 2 && !is_space(bytes[2])) {
    throw PnmError(PnmError::Kind::MalformedHeader, 2, "expected whitespace after magic number");
  }
  const long width = reader.read_positive("width");
  const long height = reader.read_positive("height");
  const std::size_t maxval_offset = [&] {
    HeaderReader probe = reader;
    probe.skip_space_and_comments();
    return probe.pos();
  }();
  const long maxval = reader.read_positive("maxval");
  if (width < 1 || height < 1) {
    throw PnmError(PnmError::Kind::MalformedHeader, maxval_offset, "zero image dimension");
  }
  if (maxval != 255) {
    throw PnmError(PnmError::Kind::UnsupportedMaxval, maxval_offset,
                   "maxval " + std::to_string(maxval) + " is not 255");
  }
  if (reader.pos() >= bytes.size()) {
    throw PnmError(PnmError::Kind::Truncated, reader.pos(), "missing raster after header");
  }
  reader.advance(1);  // the single whitespace byte terminating the header
  const std::size_t data_start = reader.pos();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  const std::size_t have = bytes.size() - data_start;
  if (have < need) {
    throw PnmError(PnmError::Kind::Truncated, data_start + have,
                   "raster truncated: expected " + std::to_string(need) + " bytes, found " +
                       std::to_string(have));
  }
  consumed = data_start + need;
  const auto raster = bytes.subspan(data_start, need);
  if (color) {
    ColorFrame frame;
    frame.width = static_cast<int>(width);
    frame.height = static_cast<int>(height);
    frame.pixels.assign(raster.begin(), raster.end());
    return frame;
  }
  GrayFrame frame;
  frame.width = static_cast<int>(width);
  frame.height = static_cast<int>(height);
  frame.pixels.assign(raster.begin(), raster.end());
  return frame;
}

PnmFrame decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t consumed = 0;
  return decode_pnm_prefix(bytes, consumed);
}

namespace {

std::vector<std::uint8_t> encode_raw(char magic, int width, int height,
                                     const std::vector<std::uint8_t>& pixels) {
  const std::string header = std::string("P") + magic + "\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + pixels.size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_pnm(const GrayFrame& frame) {
  return encode_raw('5', frame.width, frame.height, frame.pixels);
}

std::vector<std::uint8_t> encode_pnm(const ColorFrame& frame) {
  return encode_raw('6', frame.width, frame.height, frame.pixels);
}

std::vector<std::uint8_t> encode_pnm(const PnmFrame& frame) {
  return std::visit([](const auto& f) { return encode_pnm(f); }, frame);
}

PnmFrame read_pnm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  try {
    return decode_pnm(bytes);
  } catch (const PnmError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_pnm_file(const std::filesystem::path& path, const PnmFrame& frame) {
  const auto bytes = encode_pnm(frame);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace sentinel

// NIfTI-1 label-volume I/O.
//
// Only the fields the voxel lattice depends on are interpreted: dim,
// datatype, bitpix, pixdim, vox_offset, scl_slope/scl_inter, magic. The rest
// of the 348-byte header is carried through untouched on a load/save round
// trip so orientation metadata survives. Byte-swapped (big-endian) files are
// normalized at load.

#include <zlib.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "volume.hpp"

namespace maskforge {

namespace {

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;     // must be 348
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)

static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must pack to 348 bytes");

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtUint16 = 512;

template <typename T>
void swap_bytes(T& v) {
  auto* p = reinterpret_cast<std::uint8_t*>(&v);
  std::reverse(p, p + sizeof(T));
}

void swap_header(Nifti1Header& h) {
  swap_bytes(h.sizeof_hdr);
  swap_bytes(h.extents);
  swap_bytes(h.session_error);
  for (auto& d : h.dim) swap_bytes(d);
  swap_bytes(h.intent_p1);
  swap_bytes(h.intent_p2);
  swap_bytes(h.intent_p3);
  swap_bytes(h.intent_code);
  swap_bytes(h.datatype);
  swap_bytes(h.bitpix);
  swap_bytes(h.slice_start);
  for (auto& p : h.pixdim) swap_bytes(p);
  swap_bytes(h.vox_offset);
  swap_bytes(h.scl_slope);
  swap_bytes(h.scl_inter);
  swap_bytes(h.slice_end);
  swap_bytes(h.cal_max);
  swap_bytes(h.cal_min);
  swap_bytes(h.slice_duration);
  swap_bytes(h.toffset);
  swap_bytes(h.glmax);
  swap_bytes(h.glmin);
  swap_bytes(h.qform_code);
  swap_bytes(h.sform_code);
  swap_bytes(h.quatern_b);
  swap_bytes(h.quatern_c);
  swap_bytes(h.quatern_d);
  swap_bytes(h.qoffset_x);
  swap_bytes(h.qoffset_y);
  swap_bytes(h.qoffset_z);
  for (auto& v : h.srow_x) swap_bytes(v);
  for (auto& v : h.srow_y) swap_bytes(v);
  for (auto& v : h.srow_z) swap_bytes(v);
}

bool is_gzip(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return bytes;
}

std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& in,
                                          const std::string& path) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 32) != Z_OK)  // accept gzip or zlib wrapping
    throw IoError("zlib inflateInit failed");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::array<std::uint8_t, 1 << 16> buf;
  strm.next_in = const_cast<Bytef*>(in.data());
  strm.avail_in = static_cast<uInt>(in.size());
  int ret = Z_OK;
  do {
    strm.next_out = buf.data();
    strm.avail_out = static_cast<uInt>(buf.size());
    ret = inflate(&strm, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&strm);
      throw FormatError("corrupt gzip stream in '" + path + "'");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - strm.avail_out));
  } while (ret != Z_STREAM_END && (strm.avail_in > 0 || strm.avail_out == 0));
  inflateEnd(&strm);
  if (ret != Z_STREAM_END)
    throw FormatError("truncated gzip stream in '" + path + "'");
  return out;
}

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& in) {
  z_stream strm{};
  // Fixed level and strategy keep the output byte-stable across runs; gzip
  // header via windowBits 15+16 carries mtime=0.
  if (deflateInit2(&strm, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw IoError("zlib deflateInit failed");
  std::vector<std::uint8_t> out;
  out.resize(deflateBound(&strm, static_cast<uLong>(in.size())));
  strm.next_in = const_cast<Bytef*>(in.data());
  strm.avail_in = static_cast<uInt>(in.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  int ret = deflate(&strm, Z_FINISH);
  deflateEnd(&strm);
  if (ret != Z_STREAM_END) throw IoError("gzip compression failed");
  out.resize(out.size() - strm.avail_out);
  return out;
}

bool native_little_endian() {
  const std::uint16_t probe = 1;
  return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

template <typename T>
T read_raw(const std::uint8_t* p, bool swapped) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if (swapped) swap_bytes(v);
  return v;
}

}  // namespace

LabelVolume load_volume(const std::string& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  if (is_gzip(bytes)) bytes = gzip_decompress(bytes, path);

  if (bytes.size() < sizeof(Nifti1Header))
    throw FormatError("'" + path + "' is too small to hold a NIfTI-1 header");

  Nifti1Header hdr;
  std::memcpy(&hdr, bytes.data(), sizeof(hdr));

  bool swapped = false;
  if (hdr.sizeof_hdr != 348) {
    std::int32_t sw = hdr.sizeof_hdr;
    swap_bytes(sw);
    if (sw != 348)
      throw FormatError("'" + path + "' is not a NIfTI-1 file (sizeof_hdr != 348)");
    swapped = true;
    swap_header(hdr);
  }

  const bool magic_n1 = std::memcmp(hdr.magic, "n+1\0", 4) == 0;
  const bool magic_ni1 = std::memcmp(hdr.magic, "ni1\0", 4) == 0;
  if (!magic_n1 && !magic_ni1)
    throw FormatError("'" + path + "' has an invalid NIfTI-1 magic string");
  if (magic_ni1)
    throw FormatError("'" + path +
                      "': two-file NIfTI-1 (.hdr/.img) storage is not supported");

  if (hdr.dim[0] != 3)
    throw FormatError("'" + path + "': expected a 3D volume, dim[0]=" +
                      std::to_string(hdr.dim[0]));

  Dims dims;
  for (int i = 0; i < 3; ++i) {
    if (hdr.dim[i + 1] <= 0)
      throw FormatError("'" + path + "': nonpositive dim[" + std::to_string(i + 1) + "]");
    dims[i] = static_cast<std::uint64_t>(hdr.dim[i + 1]);
  }
  const std::uint64_t n = voxel_count(dims);
  if (n > (std::uint64_t(1) << 33))
    throw FormatError("'" + path + "': volume too large");

  Spacing spacing;
  for (int i = 0; i < 3; ++i) {
    double p = hdr.pixdim[i + 1];
    if (!(p > 0.0) || !std::isfinite(p))
      throw FormatError("'" + path + "': nonpositive pixdim[" + std::to_string(i + 1) + "]");
    spacing[i] = p;
  }

  std::size_t elem = 0;
  switch (hdr.datatype) {
    case kDtUint8: elem = 1; break;
    case kDtInt16: elem = 2; break;
    case kDtInt32: elem = 4; break;
    case kDtUint16: elem = 2; break;
    case kDtFloat32: elem = 4; break;
    default:
      throw FormatError("'" + path + "': unsupported NIfTI datatype " +
                        std::to_string(hdr.datatype));
  }

  double offset_f = hdr.vox_offset;
  if (!(offset_f >= sizeof(Nifti1Header)) || offset_f != std::floor(offset_f))
    throw FormatError("'" + path + "': invalid vox_offset");
  const std::size_t offset = static_cast<std::size_t>(offset_f);
  if (bytes.size() < offset + n * elem)
    throw FormatError("'" + path + "': file truncated (missing voxel data)");

  // slope 0 means "no scaling" per the NIfTI-1 convention
  const bool scale = hdr.scl_slope != 0.0f &&
                     !(hdr.scl_slope == 1.0f && hdr.scl_inter == 0.0f);
  const double slope = scale ? hdr.scl_slope : 1.0;
  const double inter = scale ? hdr.scl_inter : 0.0;

  std::vector<label_t> labels(n);
  const std::uint8_t* data = bytes.data() + offset;
  for (std::uint64_t i = 0; i < n; ++i) {
    double v;
    switch (hdr.datatype) {
      case kDtUint8: v = data[i]; break;
      case kDtInt16: v = read_raw<std::int16_t>(data + 2 * i, swapped); break;
      case kDtInt32: v = read_raw<std::int32_t>(data + 4 * i, swapped); break;
      case kDtUint16: v = read_raw<std::uint16_t>(data + 2 * i, swapped); break;
      case kDtFloat32: v = read_raw<float>(data + 4 * i, swapped); break;
      default: v = 0; break;
    }
    v = slope * v + inter;
    if (!std::isfinite(v) || v != std::floor(v))
      throw FormatError("'" + path + "': non-integer voxel value " + std::to_string(v));
    if (v < 0.0)
      throw FormatError("'" + path + "': negative label value " + std::to_string(v));
    if (v >= 256.0)
      throw FormatError("'" + path + "': label value " + std::to_string(v) + " >= 256");
    labels[i] = static_cast<label_t>(v);
  }

  LabelVolume vol = make_volume(dims, spacing, std::move(labels), case_id_from_path(path));
  vol.raw_header.resize(sizeof(Nifti1Header));
  std::memcpy(vol.raw_header.data(), &hdr, sizeof(hdr));  // normalized byte order
  return vol;
}

void save_volume(const LabelVolume& vol, const std::string& path) {
  Nifti1Header hdr{};
  if (vol.raw_header.size() == sizeof(Nifti1Header)) {
    std::memcpy(&hdr, vol.raw_header.data(), sizeof(hdr));
  } else {
    hdr.regular = 'r';
    hdr.pixdim[0] = 1.0f;
  }

  hdr.sizeof_hdr = 348;
  hdr.dim[0] = 3;
  for (int i = 0; i < 3; ++i) {
    if (vol.dims[i] > std::uint64_t(std::numeric_limits<std::int16_t>::max()))
      throw ValidationError("volume dimension exceeds NIfTI-1 int16 dim limit");
    hdr.dim[i + 1] = static_cast<std::int16_t>(vol.dims[i]);
  }
  for (int i = 4; i < 8; ++i) hdr.dim[i] = 1;
  hdr.datatype = kDtUint8;
  hdr.bitpix = 8;
  for (int i = 0; i < 3; ++i) hdr.pixdim[i + 1] = static_cast<float>(vol.spacing[i]);
  for (int i = 4; i < 8; ++i) hdr.pixdim[i] = 0.0f;
  hdr.vox_offset = 352.0f;
  hdr.scl_slope = 1.0f;
  hdr.scl_inter = 0.0f;
  std::memcpy(hdr.magic, "n+1\0", 4);

  if (!native_little_endian())
    swap_header(hdr);  // on-disk files are written little-endian

  std::vector<std::uint8_t> bytes(352 + vol.labels.size());
  std::memcpy(bytes.data(), &hdr, sizeof(hdr));
  // 4 zero bytes at 348..351: no header extensions
  std::memcpy(bytes.data() + 352, vol.labels.data(), vol.labels.size());

  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) bytes = gzip_compress(bytes);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace maskforge

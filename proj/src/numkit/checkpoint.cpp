#include "metacure/numkit/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace metacure::numkit {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const StoreGroup& groups) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "' for write");

  std::uint64_t total = 0;
  for (const auto& [prefix, store] : groups) total += store->count();

  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, total);
  for (const auto& [prefix, store] : groups) {
    for (const std::string& name : store->names()) {
      const std::string full = prefix + name;
      const Array& v = store->value(name);
      write_pod(os, static_cast<std::uint32_t>(full.size()));
      os.write(full.data(), static_cast<std::streamsize>(full.size()));
      write_pod(os, static_cast<std::uint32_t>(v.rank()));
      for (std::size_t d : v.shape()) write_pod(os, static_cast<std::uint64_t>(d));
      os.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for '" + path.string() + "'");
}

void load_checkpoint(const std::filesystem::path& path, const MutableStoreGroup& groups) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "'");

  char magic[4];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in '" + path.string() + "'");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const auto total = read_pod<std::uint64_t>(is);

  std::set<std::string> expected;
  for (const auto& [prefix, store] : groups)
    for (const std::string& name : store->names()) expected.insert(prefix + name);
  if (expected.size() != total)
    throw std::runtime_error("checkpoint: entry count mismatch, file has " +
                             std::to_string(total) + ", expected " +
                             std::to_string(expected.size()));

  for (std::uint64_t rec = 0; rec < total; ++rec) {
    const auto name_len = read_pod<std::uint32_t>(is);
    std::string full(name_len, '\0');
    is.read(full.data(), name_len);
    if (!is) throw std::runtime_error("checkpoint: truncated name record");
    const auto rank = read_pod<std::uint32_t>(is);
    std::vector<std::size_t> shape;
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(is)));
      n *= shape.back();
    }

    ParamStore* target = nullptr;
    std::string local;
    for (const auto& [prefix, store] : groups) {
      if (full.rfind(prefix, 0) == 0 && store->has(full.substr(prefix.size()))) {
        target = store;
        local = full.substr(prefix.size());
        break;
      }
    }
    if (target == nullptr)
      throw std::runtime_error("checkpoint: unexpected entry '" + full + "'");
    Array& v = target->value(local);
    if (v.shape() != shape)
      throw std::runtime_error("checkpoint: shape mismatch for '" + full + "'");
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated payload for '" + full + "'");
    expected.erase(full);
  }
  if (!expected.empty())
    throw std::runtime_error("checkpoint: missing entry '" + *expected.begin() + "'");
}

}  // namespace metacure::numkit

#ifndef NETCLASS_DIGEST_HPP
#define NETCLASS_DIGEST_HPP

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace netclass {

/// Incremental SHA-256.
class Hasher {
public:
    Hasher();
    ~Hasher();
    Hasher(const Hasher&) = delete;
    Hasher& operator=(const Hasher&) = delete;

    Hasher& update(std::string_view bytes);
    Hasher& update(std::span<const double> values);
    Hasher& update_u64(unsigned long long value);

    /// Hex digest; the hasher must not be updated afterwards.
    std::string hex();

private:
    struct State;
    std::unique_ptr<State> state_;
};

std::string sha256_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

}

#endif

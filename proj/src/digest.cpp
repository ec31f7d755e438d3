#include "netclass/digest.hpp"
#include "netclass/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>

namespace netclass {

struct Hasher::State {
    EVP_MD_CTX* ctx = nullptr;
};

Hasher::Hasher() : state_(std::make_unique<State>()) {
    state_->ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(state_->ctx, EVP_sha256(), nullptr);
}

Hasher::~Hasher() {
    EVP_MD_CTX_free(state_->ctx);
}

Hasher& Hasher::update(std::string_view bytes) {
    update_u64(bytes.size());
    EVP_DigestUpdate(state_->ctx, bytes.data(), bytes.size());
    return *this;
}

Hasher& Hasher::update(std::span<const double> values) {
    update_u64(values.size());
    EVP_DigestUpdate(state_->ctx, values.data(), values.size_bytes());
    return *this;
}

Hasher& Hasher::update_u64(unsigned long long value) {
    std::array<unsigned char, 8> buf;
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>(value >> (8 * i));
    }
    EVP_DigestUpdate(state_->ctx, buf.data(), buf.size());
    return *this;
}

std::string Hasher::hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> out;
    unsigned int len = 0;
    EVP_DigestFinal_ex(state_->ctx, out.data(), &len);
    std::string result;
    result.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", out[i]);
        result += buf;
    }
    return result;
}

std::string sha256_hex(std::string_view bytes) {
    Hasher h;
    return h.update(bytes).hex();
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    Hasher h;
    std::array<char, 1 << 16> buf;
    std::string chunk;
    while (in) {
        in.read(buf.data(), buf.size());
        chunk.assign(buf.data(), static_cast<std::size_t>(in.gcount()));
        h.update(chunk);
    }
    return h.hex();
}

}

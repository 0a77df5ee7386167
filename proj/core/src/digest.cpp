#include "emsim/digest.hpp"

#include "emsim/csv.hpp"
#include "emsim/error.hpp"

#include <openssl/evp.h>

#include <array>

namespace emsim {

namespace {

std::string to_hex(const unsigned char* data, unsigned len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0xF];
  }
  return out;
}

std::string one_shot(const EVP_MD* md, std::string_view a, std::string_view b = {}) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw InternalInvariantBreach("EVP_MD_CTX_new failed");
  std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
  unsigned len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, md, nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, a.data(), a.size()) == 1 &&
                  EVP_DigestUpdate(ctx, b.data(), b.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, buf.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw InternalInvariantBreach("digest computation failed");
  return to_hex(buf.data(), len);
}

}  // namespace

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw InternalInvariantBreach("SHA-256 initialisation failed");
  }
}

Sha256::~Sha256() = default;
Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

void Sha256::update(std::string_view bytes) {
  if (EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size()) != 1) {
    throw InternalInvariantBreach("SHA-256 update failed");
  }
}

std::string Sha256::hex_final() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
  unsigned len = 0;
  if (EVP_DigestFinal_ex(impl_->ctx, buf.data(), &len) != 1) {
    throw InternalInvariantBreach("SHA-256 finalisation failed");
  }
  return to_hex(buf.data(), len);
}

std::string sha256_hex(std::string_view bytes) { return one_shot(EVP_sha256(), bytes); }

std::string git_blob_sha1(std::string_view content) {
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');
  return one_shot(EVP_sha1(), header, content);
}

std::string git_blob_sha1_file(const std::filesystem::path& path) {
  return git_blob_sha1(read_text_file(path));
}

}  // namespace emsim

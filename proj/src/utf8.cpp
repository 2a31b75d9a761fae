#include "whyqa/utf8.hpp"

#include <stdexcept>

namespace whyqa::utf8 {

namespace {

// Returns the decoded code point and advances `i`, or throws.
char32_t next(std::string_view s, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    throw std::invalid_argument("malformed UTF-8: bad lead byte");
  }
  if (i + extra >= s.size())
    throw std::invalid_argument("malformed UTF-8: truncated sequence");
  for (std::size_t k = 1; k <= extra; ++k) {
    const auto c = static_cast<unsigned char>(s[i + k]);
    if ((c & 0xC0) != 0x80)
      throw std::invalid_argument("malformed UTF-8: bad continuation byte");
    cp = (cp << 6) | (c & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
  if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
    throw std::invalid_argument("malformed UTF-8: invalid code point");
  i += extra + 1;
  return cp;
}

}  // namespace

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) out.push_back(next(s, i));
  return out;
}

std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

bool is_valid(std::string_view s) {
  try {
    std::size_t i = 0;
    while (i < s.size()) next(s, i);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

std::optional<std::string> substr(std::string_view s, std::size_t begin,
                                  std::size_t count) {
  const std::u32string cps = decode(s);
  if (begin > cps.size() || count > cps.size() - begin) return std::nullopt;
  return encode(std::u32string_view(cps).substr(begin, count));
}

std::optional<std::size_t> find(std::string_view haystack,
                                std::string_view needle, std::size_t from) {
  const std::u32string h = decode(haystack);
  const std::u32string n = decode(needle);
  if (from > h.size()) return std::nullopt;
  const auto pos = h.find(n, from);
  if (pos == std::u32string::npos) return std::nullopt;
  return pos;
}

}  // namespace whyqa::utf8

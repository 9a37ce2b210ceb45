#include "ynkit/phonology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ynkit/errors.hpp"
#include "ynkit/utf8.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

constexpr char32_t kMacronBelow = 0x0331;
constexpr char32_t kDiaeresis = 0x0308;

const char* kind_name(PhonemeKind k) {
  return k == PhonemeKind::consonant ? "consonant" : "vowel";
}

PhonemeKind kind_from(const std::string& s) {
  if (s == "consonant") return PhonemeKind::consonant;
  if (s == "vowel") return PhonemeKind::vowel;
  throw Error("invalid_inventory", "unknown kind: " + s);
}

const char* place_name(Place p) {
  switch (p) {
    case Place::bilabial: return "bilabial";
    case Place::alveolar: return "alveolar";
    case Place::retroflex: return "retroflex";
    case Place::laminodental: return "laminodental";
    case Place::palatal: return "palatal";
    case Place::velar: return "velar";
    case Place::glottal: return "glottal";
    case Place::none: return "none";
  }
  return "none";
}

Place place_from(const std::string& s) {
  for (Place p : {Place::bilabial, Place::alveolar, Place::retroflex,
                  Place::laminodental, Place::palatal, Place::velar,
                  Place::glottal, Place::none})
    if (s == place_name(p)) return p;
  throw Error("invalid_inventory", "unknown place: " + s);
}

const char* manner_name(Manner m) {
  switch (m) {
    case Manner::stop_voiceless: return "stop_voiceless";
    case Manner::stop_voiced: return "stop_voiced";
    case Manner::nasal: return "nasal";
    case Manner::lateral: return "lateral";
    case Manner::rhotic: return "rhotic";
    case Manner::glide: return "glide";
    case Manner::none: return "none";
  }
  return "none";
}

Manner manner_from(const std::string& s) {
  for (Manner m : {Manner::stop_voiceless, Manner::stop_voiced, Manner::nasal,
                   Manner::lateral, Manner::rhotic, Manner::glide, Manner::none})
    if (s == manner_name(m)) return m;
  throw Error("invalid_inventory", "unknown manner: " + s);
}

const char* length_name(Length l) {
  switch (l) {
    case Length::short_vowel: return "short";
    case Length::long_vowel: return "long";
    case Length::none: return "none";
  }
  return "none";
}

Length length_from(const std::string& s) {
  if (s == "short") return Length::short_vowel;
  if (s == "long") return Length::long_vowel;
  if (s == "none") return Length::none;
  throw Error("invalid_inventory", "unknown length: " + s);
}

Phoneme cons(const char* ipa, const char* orth, const char* display,
             Place place, Manner manner) {
  return Phoneme{ipa, orth, display, PhonemeKind::consonant, place, manner,
                 Length::none};
}

Phoneme vowel(const char* ipa, const char* orth, const char* display,
              Length length) {
  return Phoneme{ipa,   orth,         display, PhonemeKind::vowel,
                 Place::none, Manner::none, length};
}

std::vector<Phoneme> default_phonemes() {
  std::vector<Phoneme> p;
  // Voiceless stops.
  p.push_back(cons("p", "p", "p", Place::bilabial, Manner::stop_voiceless));
  p.push_back(cons("t", "t", "t", Place::alveolar, Manner::stop_voiceless));
  p.push_back(cons("ʈ", "ṯ", "T", Place::retroflex, Manner::stop_voiceless));
  p.push_back(cons("t̪", "th", "8", Place::laminodental, Manner::stop_voiceless));
  p.push_back(cons("c", "tj", "c", Place::palatal, Manner::stop_voiceless));
  p.push_back(cons("k", "k", "k", Place::velar, Manner::stop_voiceless));
  p.push_back(cons("ʔ", "'", "'", Place::glottal, Manner::stop_voiceless));
  // Voiced stops.
  p.push_back(cons("b", "b", "b", Place::bilabial, Manner::stop_voiced));
  p.push_back(cons("d", "d", "d", Place::alveolar, Manner::stop_voiced));
  p.push_back(cons("ɖ", "ḏ", "D", Place::retroflex, Manner::stop_voiced));
  p.push_back(cons("d̪", "dh", "9", Place::laminodental, Manner::stop_voiced));
  p.push_back(cons("ɟ", "dj", "J", Place::palatal, Manner::stop_voiced));
  p.push_back(cons("g", "g", "g", Place::velar, Manner::stop_voiced));
  // Nasals.
  p.push_back(cons("m", "m", "m", Place::bilabial, Manner::nasal));
  p.push_back(cons("n", "n", "n", Place::alveolar, Manner::nasal));
  p.push_back(cons("ɳ", "ṉ", "N", Place::retroflex, Manner::nasal));
  p.push_back(cons("n̪", "nh", "0", Place::laminodental, Manner::nasal));
  p.push_back(cons("ɲ", "ny", "Y", Place::palatal, Manner::nasal));
  p.push_back(cons("ŋ", "ŋ", "G", Place::velar, Manner::nasal));
  // Laterals.
  p.push_back(cons("l", "l", "l", Place::alveolar, Manner::lateral));
  p.push_back(cons("ɭ", "ḻ", "L", Place::retroflex, Manner::lateral));
  // Rhotics: alveolar trill spelled rr, retroflex approximant spelled r.
  p.push_back(cons("r", "rr", "r", Place::alveolar, Manner::rhotic));
  p.push_back(cons("ɻ", "r", "R", Place::retroflex, Manner::rhotic));
  // Glides.
  p.push_back(cons("w", "w", "w", Place::bilabial, Manner::glide));
  p.push_back(cons("j", "y", "y", Place::palatal, Manner::glide));
  // Vowels.
  p.push_back(vowel("i", "i", "i", Length::short_vowel));
  p.push_back(vowel("u", "u", "u", Length::short_vowel));
  p.push_back(vowel("a", "a", "a", Length::short_vowel));
  p.push_back(vowel("iː", "e", "E", Length::long_vowel));
  p.push_back(vowel("uː", "o", "O", Length::long_vowel));
  p.push_back(vowel("aː", "ä", "A", Length::long_vowel));
  return p;
}

}  // namespace

PhonemeInventory::PhonemeInventory(std::vector<Phoneme> phonemes,
                                   std::string separator)
    : phonemes_(std::move(phonemes)), separator_(std::move(separator)) {
  const std::u32string sep_cps = utf8::decode(separator_);
  if (sep_cps.size() != 1)
    throw Error("invalid_inventory", "separator must be one code point");
  separator_cp_ = sep_cps[0];

  for (std::size_t i = 0; i < phonemes_.size(); ++i) {
    const Phoneme& p = phonemes_[i];
    if (p.ipa.empty() || p.orth.empty())
      throw Error("invalid_inventory", "empty ipa or orth at index " + std::to_string(i));
    if (p.display.size() != 1 || static_cast<unsigned char>(p.display[0]) > 0x7E ||
        static_cast<unsigned char>(p.display[0]) < 0x21)
      throw Error("invalid_inventory",
                  "display must be one printable ASCII char: \"" + p.display + "\"");
    if (p.kind == PhonemeKind::vowel) {
      if (p.place != Place::none || p.manner != Manner::none ||
          p.length == Length::none)
        throw Error("invalid_inventory", "vowel feature constraints violated: " + p.ipa);
      ++vowel_count_;
    } else {
      if (p.length != Length::none)
        throw Error("invalid_inventory", "consonant must have length none: " + p.ipa);
      ++consonant_count_;
    }
    const std::u32string orth_cps = utf8::decode(p.orth);
    const std::u32string ipa_cps = utf8::decode(p.ipa);
    for (char32_t cp : orth_cps)
      if (cp == U' ' || cp == separator_cp_)
        throw Error("invalid_inventory", "spelling contains space or separator: " + p.orth);
    if (!by_orth_.emplace(orth_cps, static_cast<int>(i)).second)
      throw Error("invalid_inventory", "duplicate orth: " + p.orth);
    if (!by_ipa_.emplace(ipa_cps, static_cast<int>(i)).second)
      throw Error("invalid_inventory", "duplicate ipa: " + p.ipa);
    max_orth_cps_ = std::max(max_orth_cps_, orth_cps.size());
    max_ipa_cps_ = std::max(max_ipa_cps_, ipa_cps.size());
  }

  // Display symbols must be injective.
  for (std::size_t i = 0; i < phonemes_.size(); ++i)
    for (std::size_t j = i + 1; j < phonemes_.size(); ++j)
      if (phonemes_[i].display == phonemes_[j].display)
        throw Error("invalid_inventory",
                    "display symbol collision: " + phonemes_[i].display);

  // A spelling may be a proper prefix of another only when the longer one
  // starts with a code point that is itself a spelling (maximal munch then
  // resolves the ambiguity deterministically).
  for (const auto& [a, ai] : by_orth_) {
    for (const auto& [b, bi] : by_orth_) {
      if (a.size() >= b.size() || b.compare(0, a.size(), a) != 0) continue;
      if (by_orth_.find(b.substr(0, 1)) == by_orth_.end())
        throw Error("invalid_inventory",
                    "ambiguous spellings: \"" + phonemes_[ai].orth + "\" / \"" +
                        phonemes_[bi].orth + "\"");
    }
  }
}

const PhonemeInventory& PhonemeInventory::defaults() {
  static const PhonemeInventory inv(default_phonemes(), ".");
  return inv;
}

int PhonemeInventory::find_by_orth(const std::u32string& orth) const {
  const auto it = by_orth_.find(orth);
  return it == by_orth_.end() ? -1 : it->second;
}

int PhonemeInventory::find_by_ipa(const std::u32string& ipa) const {
  const auto it = by_ipa_.find(ipa);
  return it == by_ipa_.end() ? -1 : it->second;
}

int PhonemeInventory::find_by_ipa(std::string_view ipa) const {
  return find_by_ipa(utf8::decode(ipa));
}

std::string PhonemeInventory::to_json_string() const {
  json root;
  root["version"] = 1;
  root["separator"] = separator_;
  root["space_orth"] = " ";
  root["space_ipa_display"] = "_";
  json items = json::array();
  for (const Phoneme& p : phonemes_) {
    json item;
    item["ipa"] = p.ipa;
    item["orth"] = p.orth;
    item["display"] = p.display;
    item["kind"] = kind_name(p.kind);
    item["place"] = place_name(p.place);
    item["manner"] = manner_name(p.manner);
    item["length"] = length_name(p.length);
    items.push_back(std::move(item));
  }
  root["phonemes"] = std::move(items);
  return root.dump(2) + "\n";
}

void PhonemeInventory::to_json_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << to_json_string();
  if (!out) throw IoError(path.string(), "write failed");
}

PhonemeInventory PhonemeInventory::from_json_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("invalid_inventory", std::string("json parse: ") + e.what());
  }
  try {
    if (root.at("version").get<int>() != 1)
      throw VersionUnsupported(root.at("version").get<long long>());
    std::vector<Phoneme> phonemes;
    for (const json& item : root.at("phonemes")) {
      Phoneme p;
      p.ipa = item.at("ipa").get<std::string>();
      p.orth = item.at("orth").get<std::string>();
      p.display = item.at("display").get<std::string>();
      p.kind = kind_from(item.at("kind").get<std::string>());
      p.place = place_from(item.at("place").get<std::string>());
      p.manner = manner_from(item.at("manner").get<std::string>());
      p.length = length_from(item.at("length").get<std::string>());
      phonemes.push_back(std::move(p));
    }
    return PhonemeInventory(std::move(phonemes),
                            root.value("separator", std::string(".")));
  } catch (const json::exception& e) {
    throw Error("invalid_inventory", std::string("bad inventory json: ") + e.what());
  }
}

PhonemeInventory PhonemeInventory::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

std::string canonicalize_orth(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  std::u32string out;
  out.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    switch (cp) {
      case 0x1E6F: out += U't'; out += kMacronBelow; break;  // ṯ
      case 0x1E0F: out += U'd'; out += kMacronBelow; break;  // ḏ
      case 0x1E49: out += U'n'; out += kMacronBelow; break;  // ṉ
      case 0x1E3B: out += U'l'; out += kMacronBelow; break;  // ḻ
      case 0x1E6E: out += U'T'; out += kMacronBelow; break;
      case 0x1E0E: out += U'D'; out += kMacronBelow; break;
      case 0x1E48: out += U'N'; out += kMacronBelow; break;
      case 0x1E3A: out += U'L'; out += kMacronBelow; break;
      default:
        if (i + 1 < cps.size() && cps[i + 1] == kDiaeresis &&
            (cp == U'a' || cp == U'A')) {
          out += (cp == U'a') ? char32_t(0x00E4) : char32_t(0x00C4);
          ++i;
        } else {
          out += cp;
        }
    }
  }
  return utf8::encode(out);
}

std::string lowercase_orth(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  std::u32string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp >= U'A' && cp <= U'Z') cp += 0x20;
    else if (cp == 0x014A) cp = 0x014B;  // Ŋ
    else if (cp == 0x00C4) cp = 0x00E4;  // Ä
    else if (cp == 0x1E6E) cp = 0x1E6F;
    else if (cp == 0x1E0E) cp = 0x1E0F;
    else if (cp == 0x1E48) cp = 0x1E49;
    else if (cp == 0x1E3A) cp = 0x1E3B;
    out += cp;
  }
  return utf8::encode(out);
}

namespace {

// Longest spelling match at `pos`; returns phoneme index or -1.
int longest_match(const std::u32string& cps, std::size_t pos,
                  const PhonemeInventory& inv, std::size_t max_len,
                  bool orth_side, std::size_t* matched_len) {
  const std::size_t limit = std::min(max_len, cps.size() - pos);
  for (std::size_t len = limit; len >= 1; --len) {
    const std::u32string key = cps.substr(pos, len);
    const int idx = orth_side ? inv.find_by_orth(key) : inv.find_by_ipa(key);
    if (idx >= 0) {
      *matched_len = len;
      return idx;
    }
  }
  return -1;
}

PhonemeString scan(const std::u32string& cps, const PhonemeInventory& inv,
                   bool orth_side, bool accept_separator,
                   bool underscore_boundary) {
  const std::size_t max_len =
      orth_side ? inv.max_orth_cps() : inv.max_ipa_cps();
  PhonemeString ps;
  bool pending_boundary = false;
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i];
    if (cp == U' ' || cp == U'\t' ||
        (underscore_boundary && cp == U'_')) {
      pending_boundary = true;
      ++i;
      continue;
    }
    if (accept_separator && cp == inv.separator_cp()) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    const int idx = longest_match(cps, i, inv, max_len, orth_side, &len);
    if (idx < 0) {
      const std::u32string cluster = cps.substr(i, 1);
      throw UnrecognizedGrapheme(i, utf8::encode(cluster));
    }
    if (pending_boundary && !ps.elems.empty())
      ps.elems.push_back(PhonemeString::kWordBoundary);
    pending_boundary = false;
    ps.elems.push_back(idx);
    i += len;
  }
  return ps;
}

}  // namespace

PhonemeString orth_to_ipa(std::string_view text, const PhonemeInventory& inv) {
  const std::u32string cps = utf8::decode(canonicalize_orth(text));
  return scan(cps, inv, /*orth_side=*/true, /*accept_separator=*/true,
              /*underscore_boundary=*/false);
}

PhonemeString parse_ipa(std::string_view text, const PhonemeInventory& inv) {
  const std::u32string cps = utf8::decode(text);
  return scan(cps, inv, /*orth_side=*/false, /*accept_separator=*/false,
              /*underscore_boundary=*/true);
}

std::string ipa_to_orth(const PhonemeString& ps, const PhonemeInventory& inv) {
  const std::size_t max_len = inv.max_orth_cps();
  std::u32string out;
  // Scan positions of the spellings emitted since the last word boundary,
  // with their lengths; only those within max_len-1 of the end can be
  // disturbed by an append.
  std::vector<std::pair<std::size_t, std::size_t>> checkpoints;

  for (std::size_t e = 0; e < ps.elems.size(); ++e) {
    const std::int32_t elem = ps.elems[e];
    if (elem == PhonemeString::kWordBoundary) {
      out += U' ';
      checkpoints.clear();
      continue;
    }
    if (elem < 0 || static_cast<std::size_t>(elem) >= inv.size())
      throw UnknownPhoneme(e);
    const std::u32string spelling = utf8::decode(inv.at(elem).orth);

    bool need_sep = false;
    for (const auto& [pos, len] : checkpoints) {
      if (pos + max_len <= out.size()) continue;
      // Re-run the longest match at this position with the new text visible.
      const std::u32string probe = out.substr(pos) + spelling;
      std::size_t matched = 0;
      longest_match(probe, 0, inv, max_len, /*orth_side=*/true, &matched);
      if (matched != len) {
        need_sep = true;
        break;
      }
    }
    if (need_sep) out += inv.separator_cp();
    checkpoints.emplace_back(out.size(), spelling.size());
    out += spelling;
  }
  return utf8::encode(out);
}

const std::string& display_symbol(const Phoneme& p) { return p.display; }

std::string ipa_string(const PhonemeString& ps, const PhonemeInventory& inv,
                       std::string_view boundary) {
  std::string out;
  for (std::size_t e = 0; e < ps.elems.size(); ++e) {
    const std::int32_t elem = ps.elems[e];
    if (elem == PhonemeString::kWordBoundary) {
      out += boundary;
      continue;
    }
    if (elem < 0 || static_cast<std::size_t>(elem) >= inv.size())
      throw UnknownPhoneme(e);
    out += inv.at(elem).ipa;
  }
  return out;
}

}  // namespace ynk

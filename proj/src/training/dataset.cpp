#include "lite/training/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "lite/errors.hpp"
#include "lite/io/hash.hpp"
#include "lite/training/tokenizer.hpp"

namespace lite {

namespace {

struct FamilyInfo {
  TaskFamily family;
  std::string_view name;
  std::string_view instruction;
};

constexpr FamilyInfo kFamilies[] = {
    {TaskFamily::Copy, "copy", "copy"},          {TaskFamily::Reverse, "reverse", "reverse"},
    {TaskFamily::Upper, "upper", "uppercase"},   {TaskFamily::Sort, "sort", "sort"},
    {TaskFamily::Add, "add", "add mod 100"},     {TaskFamily::Pattern, "pattern", "continue"},
    {TaskFamily::Custom, "custom", ""},
};

// Uppercase coverage of the vocabulary stops at 'V'.
constexpr char kUpperLimit = 'v';

std::string random_letters(std::mt19937_64& rng, int len, char last) {
  std::uniform_int_distribution<int> pick(0, last - 'a');
  std::string s;
  for (int i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + pick(rng)));
  return s;
}

std::string random_input(TaskFamily family, const DatasetSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> length(spec.min_len, spec.max_len);
  switch (family) {
    case TaskFamily::Copy:
    case TaskFamily::Reverse:
    case TaskFamily::Sort:
      return random_letters(rng, length(rng), 'z');
    case TaskFamily::Upper:
      return random_letters(rng, length(rng), kUpperLimit);
    case TaskFamily::Add: {
      std::uniform_int_distribution<int> number(0, 99);
      const int a = number(rng);
      const int b = number(rng);
      return std::to_string(a) + "," + std::to_string(b);
    }
    case TaskFamily::Pattern: {
      std::uniform_int_distribution<int> unit_len(2, 3);
      const int u = unit_len(rng);
      std::string unit;
      std::uniform_int_distribution<int> letter(0, 25);
      while (static_cast<int>(unit.size()) < u) {
        const char c = static_cast<char>('a' + letter(rng));
        if (unit.find(c) == std::string::npos) unit.push_back(c);
      }
      std::uniform_int_distribution<int> total(2 * u, 2 * u + 3);
      const int n = total(rng);
      std::string s;
      for (int i = 0; i < n; ++i) s.push_back(unit[static_cast<std::size_t>(i % u)]);
      return s;
    }
    case TaskFamily::Custom:
      break;
  }
  throw ConfigError("cannot generate inputs for a custom task");
}

// Smallest period p such that s[i] == s[i - p] for all i >= p.
std::size_t period_of(std::string_view s) {
  for (std::size_t p = 1; p < s.size(); ++p) {
    bool ok = true;
    for (std::size_t i = p; i < s.size() && ok; ++i) ok = s[i] == s[i - p];
    if (ok) return p;
  }
  return s.size();
}

std::string escape_field(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i >= s.size()) throw FormatError("dangling escape in dataset record");
    switch (s[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      default: throw FormatError(std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

}  // namespace

std::string_view family_name(TaskFamily family) {
  for (const auto& f : kFamilies) {
    if (f.family == family) return f.name;
  }
  return "custom";
}

TaskFamily family_from_name(std::string_view name) {
  for (const auto& f : kFamilies) {
    if (f.name == name) return f.family;
  }
  throw ConfigError("unknown task family '" + std::string(name) + "'");
}

std::string_view family_instruction(TaskFamily family) {
  for (const auto& f : kFamilies) {
    if (f.family == family) return f.instruction;
  }
  return "";
}

TaskFamily family_from_instruction(std::string_view instruction) {
  for (const auto& f : kFamilies) {
    if (f.family != TaskFamily::Custom && f.instruction == instruction) return f.family;
  }
  return TaskFamily::Custom;
}

std::string solve_task(TaskFamily family, std::string_view input) {
  std::string s(input);
  switch (family) {
    case TaskFamily::Copy:
      return s;
    case TaskFamily::Reverse:
      std::reverse(s.begin(), s.end());
      return s;
    case TaskFamily::Upper:
      for (char& c : s) c = static_cast<char>(c - 'a' + 'A');
      return s;
    case TaskFamily::Sort:
      std::sort(s.begin(), s.end());
      return s;
    case TaskFamily::Add: {
      const auto comma = s.find(',');
      if (comma == std::string::npos) throw ConfigError("add task input needs 'a,b'");
      const int a = std::stoi(s.substr(0, comma));
      const int b = std::stoi(s.substr(comma + 1));
      return std::to_string((a + b) % 100);
    }
    case TaskFamily::Pattern: {
      const std::size_t p = period_of(s);
      std::string out;
      for (std::size_t i = 0; i < 3; ++i) out.push_back(s[(s.size() + i) % p]);
      return out;
    }
    case TaskFamily::Custom:
      break;
  }
  throw ConfigError("no reference solver for custom tasks");
}

std::string render_prompt(std::string_view instruction, std::string_view input) {
  std::string out = "Instruction: ";
  out += instruction;
  out += "\nInput: ";
  out += input;
  out += "\nOutput: ";
  return out;
}

std::string InstructionExample::prompt_text() const { return render_prompt(instruction, input); }

std::string InstructionExample::prompt_id() const {
  return io::sha256_hex(prompt_text()).substr(0, 16);
}

InstructionExample make_example(std::string instruction, std::string input, std::string output,
                                int max_seq_len) {
  InstructionExample ex;
  ex.family = family_from_instruction(instruction);
  ex.instruction = std::move(instruction);
  ex.input = std::move(input);
  ex.output = std::move(output);
  ex.tokens = CharTokenizer::encode(ex.prompt_text());
  ex.prompt_len = ex.tokens.size();
  const auto out_tokens = CharTokenizer::encode(ex.output);
  ex.tokens.insert(ex.tokens.end(), out_tokens.begin(), out_tokens.end());
  ex.tokens.push_back(CharTokenizer::kEos);
  if (ex.tokens.size() > static_cast<std::size_t>(max_seq_len)) {
    throw LengthError("rendered example has " + std::to_string(ex.tokens.size()) +
                      " tokens, max_seq_len is " + std::to_string(max_seq_len));
  }
  ex.mask.assign(ex.tokens.size(), 0);
  std::fill(ex.mask.begin() + static_cast<std::ptrdiff_t>(ex.prompt_len), ex.mask.end(), 1);
  return ex;
}

DatasetSpec DatasetSpec::uniform(int per_family, int max_seq_len) {
  DatasetSpec spec;
  for (TaskFamily f : kAllFamilies) spec.counts.emplace_back(f, per_family);
  spec.max_seq_len = max_seq_len;
  return spec;
}

int DatasetSpec::total() const {
  int n = 0;
  for (const auto& [f, c] : counts) n += c;
  return n;
}

std::vector<InstructionExample> gen_dataset(const DatasetSpec& spec, std::uint64_t seed,
                                            const std::set<std::string>& exclude) {
  if (spec.min_len < 1 || spec.max_len < spec.min_len) {
    throw ConfigError("dataset lengths must satisfy 1 <= min_len <= max_len");
  }
  std::mt19937_64 rng(seed);
  std::set<std::string> seen = exclude;
  std::vector<InstructionExample> out;
  for (const auto& [family, count] : spec.counts) {
    int made = 0;
    long attempts = 0;
    const long budget = 1000L * std::max(count, 1);
    while (made < count) {
      if (++attempts > budget) {
        throw ConfigError("cannot draw " + std::to_string(count) + " distinct '" +
                          std::string(family_name(family)) + "' examples");
      }
      std::string input = random_input(family, spec, rng);
      std::string output = solve_task(family, input);
      InstructionExample ex;
      try {
        ex = make_example(std::string(family_instruction(family)), std::move(input),
                          std::move(output), spec.max_seq_len);
      } catch (const LengthError&) {
        continue;
      }
      if (!seen.insert(ex.prompt_id()).second) continue;
      out.push_back(std::move(ex));
      ++made;
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::set<std::string> prompt_ids(std::span<const InstructionExample> examples) {
  std::set<std::string> ids;
  for (const auto& ex : examples) ids.insert(ex.prompt_id());
  return ids;
}

std::string encode_record(const InstructionExample& example) {
  return escape_field(example.instruction) + "\t" + escape_field(example.input) + "\t" +
         escape_field(example.output);
}

InstructionExample decode_record(std::string_view line, int max_seq_len) {
  const auto t1 = line.find('\t');
  const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos) {
    throw FormatError("dataset record needs exactly three tab-separated fields");
  }
  return make_example(unescape_field(line.substr(0, t1)),
                      unescape_field(line.substr(t1 + 1, t2 - t1 - 1)),
                      unescape_field(line.substr(t2 + 1)), max_seq_len);
}

void write_dataset(const std::string& path, std::span<const InstructionExample> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  for (const auto& ex : examples) out << encode_record(ex) << '\n';
}

std::vector<InstructionExample> read_dataset(const std::string& path, int max_seq_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  std::vector<InstructionExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(decode_record(line, max_seq_len));
    } catch (const Error& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lite

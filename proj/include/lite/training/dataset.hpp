#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lite/numcore/ops.hpp"

namespace lite {

enum class TaskFamily { Copy, Reverse, Upper, Sort, Add, Pattern, Custom };

inline constexpr TaskFamily kAllFamilies[] = {TaskFamily::Copy, TaskFamily::Reverse,
                                              TaskFamily::Upper, TaskFamily::Sort,
                                              TaskFamily::Add,  TaskFamily::Pattern};

std::string_view family_name(TaskFamily family);
TaskFamily family_from_name(std::string_view name);
// Instruction text used when rendering a family ("copy", "reverse", ...).
std::string_view family_instruction(TaskFamily family);
TaskFamily family_from_instruction(std::string_view instruction);

// Reference answer for a synthetic task input.
std::string solve_task(TaskFamily family, std::string_view input);

// One rendered instruction-following example:
//   "Instruction: <instruction>\nInput: <input>\nOutput: <output>" + EOS
// `mask` is set exactly on the output tokens and the trailing EOS.
struct InstructionExample {
  TaskFamily family = TaskFamily::Custom;
  std::string instruction;
  std::string input;
  std::string output;
  std::vector<int> tokens;
  ops::Mask mask;
  std::size_t prompt_len = 0;

  std::string prompt_text() const;
  std::span<const int> prompt_tokens() const {
    return std::span<const int>(tokens).first(prompt_len);
  }
  // Stable content hash of the rendered prompt (16 hex digits).
  std::string prompt_id() const;
};

// Throws LengthError when the rendering does not fit in max_seq_len.
InstructionExample make_example(std::string instruction, std::string input, std::string output,
                                int max_seq_len);
std::string render_prompt(std::string_view instruction, std::string_view input);

struct DatasetSpec {
  std::vector<std::pair<TaskFamily, int>> counts;
  int min_len = 3;
  int max_len = 6;
  int max_seq_len = 256;

  static DatasetSpec uniform(int per_family, int max_seq_len = 256);
  int total() const;
};

// Deterministic synthetic instruction data. Prompts are unique within the
// result and never collide with `exclude` (prompt ids).
std::vector<InstructionExample> gen_dataset(const DatasetSpec& spec, std::uint64_t seed,
                                            const std::set<std::string>& exclude = {});

std::set<std::string> prompt_ids(std::span<const InstructionExample> examples);

// Dataset file: one record per line, "instruction<TAB>input<TAB>output",
// with '\\', TAB and newline inside fields written as \\, \t and \n.
std::string encode_record(const InstructionExample& example);
InstructionExample decode_record(std::string_view line, int max_seq_len);
void write_dataset(const std::string& path, std::span<const InstructionExample> examples);
std::vector<InstructionExample> read_dataset(const std::string& path, int max_seq_len);

}  // namespace lite

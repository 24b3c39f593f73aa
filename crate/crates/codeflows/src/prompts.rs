//! Prompt templates for the competitive-coding flows.
//!
//! `{{name}}` slots are filled from the problem payload and the flow's
//! partial variables at render time.

pub const CODE_SYSTEM: &str = r#"Your goal is to provide executable Python code that solves a competitive programming problem. The code should correctly handle all corner cases in order to pass the hidden test cases, which are used to evaluate the correctness of the solution.

The user will specify the problem by providing you with:
  - the problem statement
  - input description
  - output description
  - example test cases
  - (optional) explanation of the test cases

The user will provide you with a task and an output format that you will strictly follow."#;

pub const CODE_QUERY: &str = r#"# Problem statement
{{problem_description}}

# Input description
{{input_description}}

# Output description
{{output_description}}

{{io_examples_and_explanation}}


The input should be read from the standard input and the output should be passed to the standard output.
Return Python code that solves the problem. Reply in the following format:
```python
{{code_placeholder}}
```"#;

pub const CODE_HUMAN: &str = r#"{{query}}"#;

pub const CODE_REFLECTION_REPLY: &str = r#"Consider the problem statement and the last proposed solution. Are you sure that the solution is provided in the requested format, and crucially, solves the problem?
If that is not the case, provide the corrected version of the code in the following format:
```python
{{python_code}}
```
otherwise, reply:
"Final answer.""#;

pub const CODE_COLLAB_HUMAN: &str = r#"# Feedback on the last proposed solution
{{code_feedback}}


Consider the original problem statement, the last proposed solution and the provided feedback. Does the solution need to be updated? If so, provide the corrected version of the code in the following format:
```python
{{code_placeholder}}
```
otherwise, reply:
"Final answer.""#;

pub const CODE_CRITIC_SYSTEM: &str = r#"Your goal is to identify potential issues with a competitive programming solution attempt.

The user will specify the problem by providing you with:
  - the problem statement
  - input description
  - output description
  - example test cases
  - (optional) explanation of the test cases
  - a Python solution attempt

Crucially, your goal is to correctly identify potential issues with the solution attempt, and not to provide the code implementation yourself.
The user will provide you with a task and an output format that you will strictly follow."#;

pub const CODE_CRITIC_QUERY: &str = r#"# Problem statement
{{problem_description}}

# Input description
{{input_description}}

# Output description
{{output_description}}

{{io_examples_and_explanation}}

# Python solution attempt:
```python
{{code}}
```


Consider the problem statement and the solution attempt. Are there any issues with the proposed solution or it is correct? Explain your reasoning very concisely, and do not provide code."#;

pub const CODE_DEBUG_HUMAN: &str = r#"{{testing_results_summary}}


Consider the problem statement, the last proposed solution, and its issue. Provide a corrected version of the code that solves the original problem and resolves the issue, without any explanation, in the following format:
```python
{{code_placeholder}}
```"#;

pub const DEBUG_CRITIC_SYSTEM: &str = r#"Your goal is to identify the issues with an incorrect competitive programming solution attempt.

The user will specify the problem by providing you with:
  - the problem statement
  - input description
  - output description
  - example test cases
  - (optional) explanation of the test cases
  - an incorrect Python solution attempt and a description of its issue

Crucially, your goal is to consider all aspects of the problem and pinpoint the issues with the solution attempt, and not to provide the code implementation yourself.
Some aspects to consider: Is the input correctly parsed? Is the output correctly formatted? Are the corner cases correctly handled? Is there a logical mistake with the algorithm itself?
Use the code execution results provided in the issue description to guide your reasoning/debugging."#;

pub const DEBUG_CRITIC_QUERY: &str = r#"# Problem statement
{{problem_description}}

# Input description
{{input_description}}

# Output description
{{output_description}}

{{io_examples_and_explanation}}

# Solution attempt to be fixed
```python
{{code}}
```

{{testing_results_summary}}


Consider the problem statement, the solution attempt and the issue. Why is the solution attempt incorrect? How should it be fixed? Explain your reasoning very concisely, and do not provide code."#;

pub const PLAN_SYSTEM: &str = r#"Your goal is to provide a high-level conceptual solution that, if implemented, will solve a given competitive programming problem.

The user will specify the problem by providing you with:
  - the problem statement
  - input description
  - output description
  - example test cases
  - (optional) explanation of the test cases

The proposed algorithm should be computationally efficient, logically correct and handle all corner cases.

The user will provide you with a task and an output format that you will strictly follow."#;

pub const PLAN_QUERY: &str = r#"# Problem statement
{{problem_description}}

# Input description
{{input_description}}

# Output description
{{output_description}}

{{io_examples_and_explanation}}


Return a high-level conceptual solution that would solve the problem. Be very concise, and do not provide code.
Reply in the following format:
# Conceptual solution
{{plan_placeholder}}"#;

/// Appended to the code query in plan-then-code variants.
pub const PLAN_SECTION: &str = "\n\n# Conceptual solution\n{{plan}}";

/// Placeholder text the model is shown inside the requested code block.
pub const CODE_PLACEHOLDER: &str = "{{python_code}}";
pub const PLAN_PLACEHOLDER: &str = "{{conceptual_solution}}";

pub const PLAN_REFLECTION_REPLY: &str = r#"Consider the problem statement and the last proposed conceptual solution. Are you sure that the conceptual solution is provided in the requested format, and crucially, solves the problem?
If that is not the case, provide the corrected version of the conceptual solution in the following format:
# Conceptual solution
{{conceptual_solution}}
otherwise, reply:
"Final answer.""#;

pub const PLAN_COLLAB_HUMAN: &str = r#"# Feedback on the last proposed conceptual solution
{{plan_feedback}}


Consider the original problem statement, the last proposed conceptual solution and the provided feedback. Does the conceptual solution need to be updated? If so, provide the corrected version of the conceptual solution in the following format:
# Conceptual solution
{{plan_placeholder}}
otherwise, reply:
"Final answer.""#;

pub const PLAN_CRITIC_SYSTEM: &str = r#"Your goal is to identify potential issues with a conceptual solution to a competitive programming problem.

The user will specify the problem by providing you with:
  - the problem statement
  - input description
  - output description
  - example test cases
  - (optional) explanation of the test cases
  - a conceptual solution attempt

Crucially, your goal is to correctly identify potential issues with the conceptual solution attempt, and not to provide the code implementation yourself.
The user will provide you with a task and an output format that you will strictly follow."#;

pub const PLAN_CRITIC_QUERY: &str = r#"# Problem statement
{{problem_description}}

# Input description
{{input_description}}

# Output description
{{output_description}}

{{io_examples_and_explanation}}

# Conceptual solution attempt
{{plan}}


Consider the problem statement and the conceptual solution attempt. Are there any issues with the proposed conceptual solution or it is correct? Explain your reasoning very concisely, and do not provide code."#;

/// System-message prefixes that tell the scripted backend which role is
/// asking.
pub const CODE_ROLE_NEEDLE: &str = "Your goal is to provide executable Python code";
pub const PLAN_ROLE_NEEDLE: &str = "Your goal is to provide a high-level conceptual solution";
pub const CODE_CRITIC_NEEDLE: &str =
    "Your goal is to identify potential issues with a competitive programming solution attempt";
pub const PLAN_CRITIC_NEEDLE: &str = "Your goal is to identify potential issues with a conceptual solution";
pub const DEBUG_CRITIC_NEEDLE: &str = "Your goal is to identify the issues with an incorrect";

pub mod keyframe_oracle;
pub mod scenarios;

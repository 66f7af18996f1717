"""
Video clip generation
"""

from rigidpath.clips.clip_generator import Clip, ClipParams, format_clip_dump, generate_clips

__all__ = ['Clip', 'ClipParams', 'format_clip_dump', 'generate_clips']
